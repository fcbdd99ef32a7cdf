//! C ABI over `music_lite`.
//!
//! Objects are opaque heap handles created by `ml_*_new` and released by the
//! matching `ml_*_free`. Every fallible call returns an [`MlStatus`]; after
//! a failure [`ml_last_error`] describes it until the next call on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use music_lite::adders::{characterize, AdderModel, CharacterizeMode};
use music_lite::cordic::{CordicConfig, CordicSettings};
use music_lite::fixed::FixedWord;
use music_lite::linalg::CMatrix;
use music_lite::music::MusicConfig;
use music_lite::ofdm::{run_pipeline, run_seed, OfdmConfig, RadarScene, RngSpec};
use music_lite::svd::{svd, SvdError};
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    NonConvergence = 4,
    Panic = 5,
}

/// Opaque adder handle.
pub struct MlAdder(AdderModel);

/// Opaque CORDIC handle.
pub struct MlCordic(CordicConfig);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MlErrorMetrics {
    pub error_rate: f64,
    pub mean_absolute_error: f64,
    pub worst_case_error: u64,
    pub mean_relative_error: f64,
    pub normalized_error_distance: f64,
    pub sample_count: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MlRunResult {
    /// NaN when the run failed.
    pub estimated_range_m: f64,
    pub abs_error_pct: f64,
    pub converged: bool,
    pub cp_warning: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: MlStatus, msg: impl std::fmt::Display) -> MlStatus {
    set_error(msg.to_string());
    status
}

/// Runs `f`, converting a panic into [`MlStatus::Panic`].
fn guard(f: impl FnOnce() -> MlStatus) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == MlStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(MlStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, MlStatus> {
    if p.is_null() {
        return Err(fail(MlStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MlStatus::InvalidArgument, "string argument is not UTF-8"))
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(MlStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

/// Error message of the previous call on this thread, or NULL if it
/// succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ml_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an adder spec such as `"acla:16:4"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_adder_new(spec: *const c_char, out: *mut *mut MlAdder) -> MlStatus {
    guard(|| {
        non_null!(out);
        let spec = match str_arg(spec) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match AdderModel::from_spec(spec) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(MlAdder(m)));
                MlStatus::Ok
            }
            Err(e) => fail(MlStatus::Config, e),
        }
    })
}

/// # Safety
/// `adder` must come from [`ml_adder_new`] and not be freed twice. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ml_adder_free(adder: *mut MlAdder) {
    if !adder.is_null() {
        drop(Box::from_raw(adder));
    }
}

/// Bit width, 0 for NULL.
///
/// # Safety
/// `adder` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_adder_width(adder: *const MlAdder) -> u32 {
    adder.as_ref().map_or(0, |a| a.0.width())
}

/// `a + b + cin` through the adder; inputs are masked to the width.
///
/// # Safety
/// `adder` must be a live handle; `sum` and `cout` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_adder_eval(
    adder: *const MlAdder,
    a: u64,
    b: u64,
    cin: bool,
    sum: *mut u64,
    cout: *mut bool,
) -> MlStatus {
    guard(|| {
        non_null!(adder, sum, cout);
        let (s, c) = (*adder).0.eval(a, b, cin);
        *sum = s;
        *cout = c;
        MlStatus::Ok
    })
}

/// Proxy area and energy costs.
///
/// # Safety
/// `adder` must be a live handle; `area` and `power` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_adder_cost(
    adder: *const MlAdder,
    area: *mut f64,
    power: *mut f64,
) -> MlStatus {
    guard(|| {
        non_null!(adder, area, power);
        let c = (*adder).0.cost();
        *area = c.area_units;
        *power = c.energy_units;
        MlStatus::Ok
    })
}

/// Error metrics against exact addition. `samples == 0` requests
/// exhaustive evaluation.
///
/// # Safety
/// `adder` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_adder_characterize(
    adder: *const MlAdder,
    samples: u64,
    seed: u64,
    out: *mut MlErrorMetrics,
) -> MlStatus {
    guard(|| {
        non_null!(adder, out);
        let mode = if samples == 0 {
            CharacterizeMode::Exhaustive
        } else {
            CharacterizeMode::Sampled { n: samples, seed }
        };
        match characterize(&(*adder).0, mode) {
            Ok(m) => {
                *out = MlErrorMetrics {
                    error_rate: m.error_rate,
                    mean_absolute_error: m.mean_absolute_error,
                    worst_case_error: m.worst_case_error,
                    mean_relative_error: m.mean_relative_error,
                    normalized_error_distance: m.normalized_error_distance,
                    sample_count: m.sample_count,
                };
                MlStatus::Ok
            }
            Err(e) => fail(MlStatus::InvalidArgument, e),
        }
    })
}

/// CORDIC unit on `width`-bit words with `frac` fraction bits, using a copy
/// of `adder`. `iterations == 0` means `width`.
///
/// # Safety
/// `adder` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_cordic_new(
    adder: *const MlAdder,
    width: u32,
    frac: u32,
    iterations: u32,
    out: *mut *mut MlCordic,
) -> MlStatus {
    guard(|| {
        non_null!(adder, out);
        let settings = CordicSettings {
            width,
            frac,
            iterations: (iterations != 0).then_some(iterations),
            ..CordicSettings::default()
        };
        match settings.build((*adder).0.clone()) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(MlCordic(c)));
                MlStatus::Ok
            }
            Err(e) => fail(MlStatus::Config, e),
        }
    })
}

/// # Safety
/// `cordic` must come from [`ml_cordic_new`] and not be freed twice. NULL
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn ml_cordic_free(cordic: *mut MlCordic) {
    if !cordic.is_null() {
        drop(Box::from_raw(cordic));
    }
}

/// Rotates `(x, y)` by `theta` radians with gain compensation. Inputs are
/// quantized to the unit's format.
///
/// # Safety
/// `cordic` must be a live handle; `x_out` and `y_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_cordic_rotate(
    cordic: *const MlCordic,
    x: f64,
    y: f64,
    theta: f64,
    x_out: *mut f64,
    y_out: *mut f64,
) -> MlStatus {
    guard(|| {
        non_null!(cordic, x_out, y_out);
        let c = &(*cordic).0;
        let f = c.format();
        let w = |v: f64| FixedWord::from_f64(f, v);
        let (xw, yw, tw) = match (w(x), w(y), w(theta)) {
            (Ok(a), Ok(b), Ok(t)) => (a, b, t),
            _ => return fail(MlStatus::InvalidArgument, "non-finite input"),
        };
        match c.rotate(xw, yw, tw) {
            Ok((xr, yr)) => {
                *x_out = xr.to_f64();
                *y_out = yr.to_f64();
                MlStatus::Ok
            }
            Err(e) => fail(MlStatus::InvalidArgument, e),
        }
    })
}

/// Magnitude (gain compensated) and angle of `(x, y)`.
///
/// # Safety
/// `cordic` must be a live handle; `magnitude` and `angle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_cordic_vector(
    cordic: *const MlCordic,
    x: f64,
    y: f64,
    magnitude: *mut f64,
    angle: *mut f64,
) -> MlStatus {
    guard(|| {
        non_null!(cordic, magnitude, angle);
        let c = &(*cordic).0;
        let f = c.format();
        let (xw, yw) = match (FixedWord::from_f64(f, x), FixedWord::from_f64(f, y)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return fail(MlStatus::InvalidArgument, "non-finite input"),
        };
        match c.vector(xw, yw) {
            Ok((m, a)) => {
                *magnitude = m.to_f64();
                *angle = a.to_f64();
                MlStatus::Ok
            }
            Err(e) => fail(MlStatus::InvalidArgument, e),
        }
    })
}

/// Singular values, non-increasing, of the `rows x cols` complex matrix
/// given as row-major real and imaginary parts. `s_out` receives
/// `min(rows, cols)` values.
///
/// # Safety
/// `re` and `im` must hold `rows * cols` values; `s_out` must hold
/// `min(rows, cols)`.
#[no_mangle]
pub unsafe extern "C" fn ml_svd_singular_values(
    cordic: *const MlCordic,
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    s_out: *mut f64,
) -> MlStatus {
    guard(|| {
        non_null!(cordic, re, im, s_out);
        if rows == 0 || cols == 0 {
            return fail(MlStatus::InvalidArgument, "empty matrix");
        }
        let n = rows * cols;
        let re = std::slice::from_raw_parts(re, n);
        let im = std::slice::from_raw_parts(im, n);
        let data = re
            .iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        let a = CMatrix::from_row_major(rows, cols, data);
        match svd(&(*cordic).0, &a) {
            Ok(r) => {
                let out = std::slice::from_raw_parts_mut(s_out, rows.min(cols));
                out.copy_from_slice(&r.singular_values());
                MlStatus::Ok
            }
            Err(e @ SvdError::NonConvergence { .. }) => fail(MlStatus::NonConvergence, e),
            Err(e) => fail(MlStatus::InvalidArgument, e),
        }
    })
}

/// One pipeline run with default frame, scene and MUSIC settings, the
/// target at `range_m` and the given SNR (`noiseless` ignores it). Seeds
/// match the CLI's `simulate`.
///
/// # Safety
/// `cordic` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_simulate(
    cordic: *const MlCordic,
    range_m: f64,
    snr_db: f64,
    noiseless: bool,
    seed: u64,
    out: *mut MlRunResult,
) -> MlStatus {
    guard(|| {
        non_null!(cordic, out);
        let scene = RadarScene {
            target_range_m: range_m,
            snr_db: (!noiseless).then_some(snr_db),
            ..RadarScene::default()
        };
        let rng = RngSpec::new(run_seed(seed, scene.snr_db, 0), 0);
        match run_pipeline(
            &OfdmConfig::default(),
            &scene,
            &MusicConfig::default(),
            &(*cordic).0,
            rng,
            false,
        ) {
            Ok(r) => {
                *out = MlRunResult {
                    estimated_range_m: r.estimated_range_m,
                    abs_error_pct: r.abs_error_pct,
                    converged: r.converged,
                    cp_warning: r.cp_warning,
                };
                if r.converged {
                    MlStatus::Ok
                } else {
                    fail(
                        MlStatus::NonConvergence,
                        r.diagnostic.unwrap_or_else(|| "run failed".into()),
                    )
                }
            }
            Err(e) => fail(MlStatus::InvalidArgument, e),
        }
    })
}
