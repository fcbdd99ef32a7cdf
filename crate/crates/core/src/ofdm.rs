//! OFDM radar chain in the frequency domain: 4-QAM frame, point-target
//! channel with Doppler, AWGN, reciprocal filtering and MUSIC.
//!
//! The transmit IFFT, cyclic prefix and receive FFT cancel analytically under
//! the usual OFDM radar assumptions, so the channel acts directly on the
//! subcarrier grid.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cordic::CordicConfig;
use crate::linalg::CMatrix;
use crate::music::{
    covariance, noise_subspace, pseudospectrum, unambiguous_range, MusicConfig, MusicError,
    MusicSpectrum, SnapshotMatrix,
};
use crate::svd::SvdError;
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Error)]
pub enum OfdmError {
    #[error("invalid OFDM configuration: {0}")]
    Config(String),
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("transmit symbol at subcarrier {n}, symbol {m} is zero")]
    ZeroSymbol { n: usize, m: usize },
    #[error("grids differ in shape: {0:?} vs {1:?}")]
    Shape((usize, usize), (usize, usize)),
    #[error(transparent)]
    Music(#[from] MusicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "4-QAM", alias = "QPSK", alias = "qam4")]
    Qam4,
}

/// Frame and waveform parameters. Defaults reproduce the reference system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmConfig {
    pub carrier_hz: f64,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub subcarrier_spacing_hz: f64,
    pub symbol_duration_s: f64,
    pub cp_duration_s: f64,
    pub total_symbol_s: f64,
    pub modulation: Modulation,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            carrier_hz: 30e9,
            n_subcarriers: 32,
            n_symbols: 16,
            subcarrier_spacing_hz: 960e3,
            symbol_duration_s: 1.04e-6,
            cp_duration_s: 0.26e-6,
            total_symbol_s: 1.3e-6,
            modulation: Modulation::Qam4,
        }
    }
}

/// Relative tolerance on `symbol = 1/Δf` and `total = symbol + cp`. The
/// reference parameters themselves differ from `1/Δf` by about 0.16%.
pub const TIMING_TOLERANCE: f64 = 5e-3;

impl OfdmConfig {
    pub fn validate(&self) -> Result<(), OfdmError> {
        let positive = [
            ("carrier_hz", self.carrier_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("symbol_duration_s", self.symbol_duration_s),
            ("total_symbol_s", self.total_symbol_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(OfdmError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.cp_duration_s >= 0.0) {
            return Err(OfdmError::Config(
                "cp_duration_s must be nonnegative".into(),
            ));
        }
        if self.n_subcarriers < 2 || self.n_symbols < 1 {
            return Err(OfdmError::Config(
                "need at least 2 subcarriers and 1 symbol".into(),
            ));
        }
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        if rel(self.symbol_duration_s, 1.0 / self.subcarrier_spacing_hz) > TIMING_TOLERANCE {
            return Err(OfdmError::Config(format!(
                "symbol_duration_s {} is not 1/subcarrier_spacing_hz",
                self.symbol_duration_s
            )));
        }
        if rel(
            self.total_symbol_s,
            self.symbol_duration_s + self.cp_duration_s,
        ) > TIMING_TOLERANCE
        {
            return Err(OfdmError::Config(format!(
                "total_symbol_s {} is not symbol + cp",
                self.total_symbol_s
            )));
        }
        Ok(())
    }

    pub fn unambiguous_range(&self) -> f64 {
        unambiguous_range(self.subcarrier_spacing_hz)
    }
}

/// A single point target. `snr_db = None` disables noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarScene {
    pub target_range_m: f64,
    pub target_velocity_mps: f64,
    pub amplitude: f64,
    pub snr_db: Option<f64>,
}

impl Default for RadarScene {
    fn default() -> Self {
        RadarScene {
            target_range_m: 50.0,
            target_velocity_mps: 20.0,
            amplitude: 1.0,
            snr_db: Some(10.0),
        }
    }
}

impl RadarScene {
    pub fn validate(&self, cfg: &OfdmConfig) -> Result<(), OfdmError> {
        let max = cfg.unambiguous_range();
        if !(0.0..max).contains(&self.target_range_m) {
            return Err(OfdmError::Scene(format!(
                "target_range_m {} outside [0, {max})",
                self.target_range_m
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(OfdmError::Scene("amplitude must be positive".into()));
        }
        if !self.target_velocity_mps.is_finite() {
            return Err(OfdmError::Scene(
                "target_velocity_mps must be finite".into(),
            ));
        }
        if matches!(self.snr_db, Some(s) if !s.is_finite()) {
            return Err(OfdmError::Scene("snr_db must be finite or null".into()));
        }
        Ok(())
    }

    /// Round-trip delay `2r/c`.
    pub fn delay_s(&self) -> f64 {
        2.0 * self.target_range_m / SPEED_OF_LIGHT
    }

    /// `2·v·f_c/c`.
    pub fn doppler_hz(&self, cfg: &OfdmConfig) -> f64 {
        2.0 * self.target_velocity_mps * cfg.carrier_hz / SPEED_OF_LIGHT
    }

    /// Per-entry noise variance `b² / 10^(snr/10)`, 0 when noise is off.
    pub fn noise_variance(&self) -> f64 {
        match self.snr_db {
            Some(snr) => self.amplitude * self.amplitude / 10f64.powf(snr / 10.0),
            None => 0.0,
        }
    }
}

/// Seed and stream of one run's ChaCha8 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of Monte-Carlo run `run` at `snr_db`, independent of the adder so
/// that every adder sees the same frames and noise.
pub fn run_seed(base: u64, snr_db: Option<f64>, run: u64) -> u64 {
    let snr_bits = snr_db.map(f64::to_bits).unwrap_or(u64::MAX);
    splitmix64(splitmix64(splitmix64(base) ^ snr_bits) ^ run)
}

/// I.i.d. Gray-mapped 4-QAM symbols `(±1 ± j)/√2`.
pub fn build_frame(cfg: &OfdmConfig, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(cfg.n_subcarriers, cfg.n_symbols, |_, _| {
        let bits: u8 = rng.random_range(0..4);
        let re = if bits & 1 == 0 {
            FRAC_1_SQRT_2
        } else {
            -FRAC_1_SQRT_2
        };
        let im = if bits & 2 == 0 {
            FRAC_1_SQRT_2
        } else {
            -FRAC_1_SQRT_2
        };
        Complex64::new(re, im)
    })
}

/// `Y[n,m] = b·X[n,m]·exp(-j2π·n·Δf·τ)·exp(j2π·f_D·m·T) + w[n,m]`, with `w`
/// circular complex Gaussian of variance `σ²`.
pub fn channel(x: &CMatrix, scene: &RadarScene, cfg: &OfdmConfig, rng: &mut impl Rng) -> CMatrix {
    let tau = scene.delay_s();
    let fd = scene.doppler_hz(cfg);
    let b = scene.amplitude;
    let var = scene.noise_variance();
    let noise = (var > 0.0).then(|| Normal::new(0.0, (var / 2.0).sqrt()).expect("finite sigma"));
    let mut y = CMatrix::zeros(x.rows(), x.cols());
    for n in 0..x.rows() {
        let range_phase =
            Complex64::from_polar(1.0, -2.0 * PI * n as f64 * cfg.subcarrier_spacing_hz * tau);
        for m in 0..x.cols() {
            let doppler = Complex64::from_polar(1.0, 2.0 * PI * fd * m as f64 * cfg.total_symbol_s);
            let mut v = b * x[(n, m)] * range_phase * doppler;
            if let Some(nd) = &noise {
                v += Complex64::new(nd.sample(rng), nd.sample(rng));
            }
            y[(n, m)] = v;
        }
    }
    y
}

/// `D = Y / X` elementwise.
pub fn reciprocal_filter(y: &CMatrix, x: &CMatrix) -> Result<SnapshotMatrix, OfdmError> {
    if (y.rows(), y.cols()) != (x.rows(), x.cols()) {
        return Err(OfdmError::Shape((y.rows(), y.cols()), (x.rows(), x.cols())));
    }
    let mut d = CMatrix::zeros(y.rows(), y.cols());
    for n in 0..y.rows() {
        for m in 0..y.cols() {
            let xv = x[(n, m)];
            if xv.norm_sqr() == 0.0 {
                return Err(OfdmError::ZeroSymbol { n, m });
            }
            d[(n, m)] = y[(n, m)] / xv;
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    /// `NaN` when the run failed.
    pub estimated_range_m: f64,
    pub abs_error_pct: f64,
    pub converged: bool,
    /// Round-trip delay exceeds the cyclic prefix.
    pub cp_warning: bool,
    /// Fewer spectral peaks than targets.
    pub shortfall: bool,
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub spectrum: Option<MusicSpectrum>,
}

/// Frame, channel, reciprocal filter, covariance, fixed-point noise
/// subspace, pseudospectrum, peak search. An SVD that does not converge
/// yields a failed result rather than an error.
pub fn run_pipeline(
    cfg: &OfdmConfig,
    scene: &RadarScene,
    music: &MusicConfig,
    cordic: &CordicConfig,
    rng: RngSpec,
    keep_spectrum: bool,
) -> Result<RunResult, OfdmError> {
    cfg.validate()?;
    scene.validate(cfg)?;
    music.validate(cfg.n_subcarriers)?;
    let mut rng = rng.rng();
    let x = build_frame(cfg, &mut rng);
    let y = channel(&x, scene, cfg, &mut rng);
    let d = reciprocal_filter(&y, &x)?;
    let r = covariance(&d, music.forward_backward);
    let cp_warning = scene.delay_s() > cfg.cp_duration_s;

    let e_n = match noise_subspace(&r, music.n_targets, cordic) {
        Ok(e) => e,
        Err(MusicError::Svd(e @ SvdError::NonConvergence { .. })) => {
            return Ok(RunResult {
                estimated_range_m: f64::NAN,
                abs_error_pct: f64::NAN,
                converged: false,
                cp_warning,
                shortfall: false,
                diagnostic: Some(e.to_string()),
                spectrum: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let spec = pseudospectrum(&e_n, cfg.subcarrier_spacing_hz, music)?;
    let truth = scene.target_range_m;
    let (est, diagnostic) = match spec.peaks.first() {
        Some(&p) => (p, None),
        None => (f64::NAN, Some("no spectral peak".to_string())),
    };
    let abs_error_pct = if truth > 0.0 {
        100.0 * (est - truth).abs() / truth
    } else {
        (est - truth).abs()
    };
    Ok(RunResult {
        estimated_range_m: est,
        abs_error_pct,
        converged: true,
        cp_warning,
        shortfall: spec.shortfall,
        diagnostic,
        spectrum: keep_spectrum.then_some(spec),
    })
}
