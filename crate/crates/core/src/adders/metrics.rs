//! Statistical error characterization against the exact adder.
//!
//! The compared quantity is the full `width + 1`-bit result
//! `sum + cout·2^width` under an unsigned reading of the operands, with
//! carry-in 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bits::mask;
use super::{AdderError, AdderModel};

/// Exhaustive characterization is allowed up to `2^26` input pairs.
pub const EXHAUSTIVE_CAP_BITS: u32 = 26;

pub const CHARACTERIZE_CSV_HEADER: &str = "adder,width,mode,samples,seed,er,mae,wce,mre,ned";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacterizeMode {
    Exhaustive,
    Sampled { n: u64, seed: u64 },
}

impl CharacterizeMode {
    pub const DEFAULT_SAMPLES: u64 = 1 << 22;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub width: u32,
    pub error_rate: f64,
    pub mean_absolute_error: f64,
    pub worst_case_error: u64,
    /// `|approx - exact| / max(exact, 1)`, averaged.
    pub mean_relative_error: f64,
    pub normalized_error_distance: f64,
    pub sample_count: u64,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    /// Exact integer sums behind the floating-point means.
    pub error_count: u64,
    pub abs_error_sum: u128,
}

impl ErrorMetrics {
    /// MAE divided by `2^width`.
    pub fn mae_normalized(&self) -> f64 {
        self.mean_absolute_error / (1u64 << self.width) as f64
    }

    pub fn csv_row(&self, adder: &str) -> String {
        let (mode, seed) = if self.exhaustive {
            ("exhaustive", String::new())
        } else {
            (
                "sampled",
                self.seed.map(|s| s.to_string()).unwrap_or_default(),
            )
        };
        format!(
            "{adder},{},{mode},{},{seed},{},{},{},{},{}",
            self.width,
            self.sample_count,
            self.error_rate,
            self.mean_absolute_error,
            self.worst_case_error,
            self.mean_relative_error,
            self.normalized_error_distance
        )
    }
}

#[derive(Default)]
struct Acc {
    n: u64,
    errors: u64,
    abs_sum: u128,
    wce: u64,
    rel_sum: f64,
}

impl Acc {
    #[inline]
    fn push(&mut self, adder: &AdderModel, a: u64, b: u64) {
        let w = adder.width();
        let (s, c) = adder.eval(a, b, false);
        let approx = s | ((c as u64) << w);
        let exact = a + b;
        let d = approx.abs_diff(exact);
        self.n += 1;
        if d != 0 {
            self.errors += 1;
            self.abs_sum += d as u128;
            self.wce = self.wce.max(d);
            self.rel_sum += d as f64 / exact.max(1) as f64;
        }
    }
}

/// Error metrics of `adder` against exact addition.
pub fn characterize(
    adder: &AdderModel,
    mode: CharacterizeMode,
) -> Result<ErrorMetrics, AdderError> {
    let w = adder.width();
    let mut acc = Acc::default();
    let seed = match mode {
        CharacterizeMode::Exhaustive => {
            if 2 * w > EXHAUSTIVE_CAP_BITS {
                return Err(AdderError::ExhaustiveCap {
                    width: w,
                    cap: EXHAUSTIVE_CAP_BITS,
                });
            }
            for a in 0..1u64 << w {
                for b in 0..1u64 << w {
                    acc.push(adder, a, b);
                }
            }
            None
        }
        CharacterizeMode::Sampled { n, seed } => {
            if n == 0 {
                return Err(AdderError::Config("sample count must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = mask(w);
            for _ in 0..n {
                let a = rng.random::<u64>() & m;
                let b = rng.random::<u64>() & m;
                acc.push(adder, a, b);
            }
            Some(seed)
        }
    };
    let n = acc.n as f64;
    let mae = acc.abs_sum as f64 / n;
    Ok(ErrorMetrics {
        width: w,
        error_rate: acc.errors as f64 / n,
        mean_absolute_error: mae,
        worst_case_error: acc.wce,
        mean_relative_error: acc.rel_sum / n,
        normalized_error_distance: if acc.wce == 0 {
            0.0
        } else {
            mae / acc.wce as f64
        },
        sample_count: acc.n,
        exhaustive: seed.is_none(),
        seed,
        error_count: acc.errors,
        abs_error_sum: acc.abs_sum,
    })
}
