//! Range-domain MUSIC over OFDM subcarriers.
//!
//! Subcarriers act as sensors: a target at range `r` imprints the phase ramp
//! `a(r)[n] = exp(-j·2π·n·Δf·2r/c)`. Only the SVD runs in fixed point; the
//! covariance, steering vectors, pseudospectrum and peak search are `f64`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cordic::CordicConfig;
use crate::linalg::{dot_h, CMatrix};
use crate::svd::{svd, SvdError};
use crate::SPEED_OF_LIGHT;

/// Per-subcarrier channel estimates, `N_sub x M_sym`.
pub type SnapshotMatrix = CMatrix;

/// Frobenius norm of the covariance handed to the SVD.
pub const NORMALIZED_NORM: f64 = 0.75;

/// Floor applied to the pseudospectrum denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MusicError {
    #[error(transparent)]
    Svd(#[from] SvdError),
    #[error("invalid MUSIC configuration: {0}")]
    Config(String),
    #[error("range {range} m outside [0, {max}) m")]
    RangeOutOfBounds { range: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MusicConfig {
    pub n_targets: usize,
    pub grid_points: usize,
    /// Upper end of the search grid; `None` means the unambiguous range
    /// `c / (2Δf)`.
    pub range_max_m: Option<f64>,
    pub forward_backward: bool,
}

impl Default for MusicConfig {
    fn default() -> Self {
        MusicConfig {
            n_targets: 1,
            grid_points: 5000,
            range_max_m: None,
            forward_backward: false,
        }
    }
}

impl MusicConfig {
    pub fn validate(&self, n_sub: usize) -> Result<(), MusicError> {
        if self.n_targets < 1 || self.n_targets >= n_sub {
            return Err(MusicError::Config(format!(
                "n_targets must be in 1..{n_sub}, got {}",
                self.n_targets
            )));
        }
        if self.grid_points < 2 {
            return Err(MusicError::Config("grid_points must be at least 2".into()));
        }
        if let Some(r) = self.range_max_m {
            if !(r > 0.0 && r.is_finite()) {
                return Err(MusicError::Config(format!(
                    "range_max_m must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }

    pub fn range_max(&self, subcarrier_spacing_hz: f64) -> f64 {
        self.range_max_m
            .unwrap_or_else(|| unambiguous_range(subcarrier_spacing_hz))
    }

    /// Grid step `range_max / grid_points`.
    pub fn grid_step(&self, subcarrier_spacing_hz: f64) -> f64 {
        self.range_max(subcarrier_spacing_hz) / self.grid_points as f64
    }
}

/// `c / (2Δf)`.
pub fn unambiguous_range(subcarrier_spacing_hz: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * subcarrier_spacing_hz)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MusicSpectrum {
    pub grid: Vec<f64>,
    pub p_mu: Vec<f64>,
    /// Estimated ranges, strongest first.
    pub peaks: Vec<f64>,
    pub peak_indices: Vec<usize>,
    /// Fewer local maxima than requested targets.
    pub shortfall: bool,
}

impl MusicSpectrum {
    /// Writes `range_m,p_mu` rows.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "range_m,p_mu")?;
        for (r, p) in self.grid.iter().zip(&self.p_mu) {
            writeln!(w, "{r},{p}")?;
        }
        Ok(())
    }
}

/// `R = (1/M) Σ d_m d_m^H`, optionally averaged with `J conj(R) J`.
pub fn covariance(d: &SnapshotMatrix, forward_backward: bool) -> CMatrix {
    let (n, m) = (d.rows(), d.cols());
    let mut r = CMatrix::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let acc: Complex64 = (0..m).map(|t| d[(i, t)] * d[(k, t)].conj()).sum();
            let v = acc / m as f64;
            r[(i, k)] = v;
            r[(k, i)] = v.conj();
        }
        r[(i, i)].im = 0.0;
    }
    if forward_backward {
        let fb = CMatrix::from_fn(n, n, |i, k| {
            0.5 * (r[(i, k)] + r[(n - 1 - i, n - 1 - k)].conj())
        });
        return fb;
    }
    r
}

/// Left singular vectors of `R` for the `N - K` smallest singular values.
///
/// `R` is scaled to Frobenius norm 3/4 before quantization, so any positive
/// rescaling of `R` gives the same fixed-point input and the same subspace.
/// A norm of exactly 1 would sit on the prescale boundary, where a one-ulp
/// difference changes the exponent.
pub fn noise_subspace(r: &CMatrix, k: usize, cordic: &CordicConfig) -> Result<CMatrix, MusicError> {
    let n = r.rows();
    if k < 1 || k >= n {
        return Err(MusicError::Config(format!(
            "n_targets must be in 1..{n}, got {k}"
        )));
    }
    let norm = r.frobenius_norm();
    let rn = if norm > 0.0 {
        r.scale(NORMALIZED_NORM / norm)
    } else {
        r.clone()
    };
    let res = svd(cordic, &rn)?;
    Ok(res.u.columns(k..n))
}

/// `a(r)[n] = exp(-j·2π·n·Δf·2r/c)`.
pub fn steering(
    range_m: f64,
    n_sub: usize,
    subcarrier_spacing_hz: f64,
) -> Result<Vec<Complex64>, MusicError> {
    let max = unambiguous_range(subcarrier_spacing_hz);
    if !(0.0..max).contains(&range_m) {
        return Err(MusicError::RangeOutOfBounds {
            range: range_m,
            max,
        });
    }
    Ok(steering_unchecked(range_m, n_sub, subcarrier_spacing_hz))
}

fn steering_unchecked(range_m: f64, n_sub: usize, df: f64) -> Vec<Complex64> {
    let step = -2.0 * PI * df * 2.0 * range_m / SPEED_OF_LIGHT;
    (0..n_sub)
        .map(|n| Complex64::from_polar(1.0, step * n as f64))
        .collect()
}

/// `P(r) = 1 / max(a^H E_N E_N^H a, floor)` on `grid_points` ranges
/// `g · range_max / grid_points`, followed by a peak search.
pub fn pseudospectrum(
    e_n: &CMatrix,
    subcarrier_spacing_hz: f64,
    cfg: &MusicConfig,
) -> Result<MusicSpectrum, MusicError> {
    let n_sub = e_n.rows();
    cfg.validate(n_sub.max(cfg.n_targets + 1))?;
    let step = cfg.grid_step(subcarrier_spacing_hz);
    let cols: Vec<Vec<Complex64>> = (0..e_n.cols()).map(|c| e_n.column(c)).collect();
    let grid: Vec<f64> = (0..cfg.grid_points).map(|g| g as f64 * step).collect();
    let p_mu: Vec<f64> = grid
        .par_iter()
        .map(|&r| {
            let a = steering_unchecked(r, n_sub, subcarrier_spacing_hz);
            let den: f64 = cols.iter().map(|e| dot_h(e, &a).norm_sqr()).sum();
            1.0 / den.max(DENOMINATOR_FLOOR)
        })
        .collect();
    let (peak_indices, shortfall) = peak_search(&p_mu, cfg.n_targets);
    Ok(MusicSpectrum {
        peaks: peak_indices.iter().map(|&i| grid[i]).collect(),
        grid,
        p_mu,
        peak_indices,
        shortfall,
    })
}

/// Indices of the `k` largest local maxima, strongest first, ties toward the
/// smaller index. A run of equal values counts once, at its leftmost index,
/// and qualifies when both outside neighbors (where they exist) are lower.
/// Returns `true` alongside when fewer than `k` maxima exist.
pub fn peak_search(p: &[f64], k: usize) -> (Vec<usize>, bool) {
    let n = p.len();
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && p[j + 1] == p[i] {
            j += 1;
        }
        let left_ok = i == 0 || p[i - 1] < p[i];
        let right_ok = j == n - 1 || p[j + 1] < p[i];
        let whole = i == 0 && j == n - 1;
        if left_ok && right_ok && !whole {
            peaks.push(i);
        }
        i = j + 1;
    }
    peaks.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let shortfall = peaks.len() < k;
    peaks.truncate(k);
    (peaks, shortfall)
}
