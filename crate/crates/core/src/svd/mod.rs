//! Golub-Kahan SVD of complex matrices, built entirely from fixed-point
//! CORDIC Givens rotations.
//!
//! The input is scaled by a power of two so its Frobenius norm lies in
//! `(1/2, 1]`, which keeps every row, column and singular value inside the
//! unit ball and leaves headroom for the CORDIC gain. Singular values are
//! reported in those prescaled units together with the exponent.

mod bidiag;
mod diag;
mod givens;
mod matrix;

use thiserror::Error;

use crate::cordic::{CordicConfig, CordicError};
use crate::linalg::CMatrix;

pub use bidiag::{bidiagonalize, Bidiagonal};
pub use diag::{deflation_floor, diagonalize, Diagonal};
pub use givens::{givens_from, phase_normalize, Givens, PlaneRotation};
pub use matrix::{ComplexFixed, FixedMatrix};

#[derive(Debug, Error)]
pub enum SvdError {
    #[error(transparent)]
    Cordic(#[from] CordicError),
    #[error("bidiagonalization needs rows >= cols, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("no convergence after {steps} steps (largest superdiagonal {residual:e})")]
    NonConvergence { steps: usize, residual: f64 },
}

/// `A ≈ U · diag(s · 2^-scale) · V^H`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `M x M`.
    pub u: CMatrix,
    /// `min(M, N)` values, non-increasing and nonnegative, in prescaled units.
    pub s: Vec<f64>,
    /// `N x N`.
    pub v: CMatrix,
    /// Prescale exponent: the decomposed matrix was `A · 2^scale`.
    pub scale: i32,
    /// Golub-Kahan sweeps plus zero-diagonal chases.
    pub steps: usize,
}

impl SvdResult {
    /// Singular values of the original matrix.
    pub fn singular_values(&self) -> Vec<f64> {
        let k = (-(self.scale as f64)).exp2();
        self.s.iter().map(|s| s * k).collect()
    }

    pub fn reconstruct(&self) -> CMatrix {
        CMatrix::from_svd(&self.u, &self.singular_values(), &self.v)
    }
}

/// Prescales, quantizes and decomposes `a`.
pub fn svd(cfg: &CordicConfig, a: &CMatrix) -> Result<SvdResult, SvdError> {
    svd_fixed(cfg, &FixedMatrix::from_cmatrix(a, cfg.format()))
}

/// Decomposes an already quantized matrix. Wide matrices go through their
/// adjoint with the factors swapped.
pub fn svd_fixed(cfg: &CordicConfig, a: &FixedMatrix) -> Result<SvdResult, SvdError> {
    if let Err(e) = check_format(cfg, a) {
        return Err(e.into());
    }
    if a.rows() < a.cols() {
        let t = svd_tall(cfg, &a.adjoint())?;
        return Ok(SvdResult {
            u: t.v,
            s: t.s,
            v: t.u,
            scale: t.scale,
            steps: t.steps,
        });
    }
    svd_tall(cfg, a)
}

fn check_format(cfg: &CordicConfig, a: &FixedMatrix) -> Result<(), CordicError> {
    if a.format() != cfg.format() {
        return Err(crate::fixed::FixedError::FormatMismatch(a.format(), cfg.format()).into());
    }
    Ok(())
}

fn svd_tall(cfg: &CordicConfig, a: &FixedMatrix) -> Result<SvdResult, SvdError> {
    let (m, n) = (a.rows(), a.cols());
    let Bidiagonal {
        d, e, mut u, mut v, ..
    } = bidiagonalize(cfg, a)?;
    let Diagonal { mut s, steps } = diagonalize(cfg, &d, &e, &mut u, &mut v)?;

    for (k, sk) in s.iter_mut().enumerate() {
        if *sk < 0 {
            *sk = cfg.format().wrap(-*sk);
            v.negate_col(k);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].cmp(&s[i]).then(i.cmp(&j)));
    let perm_u: Vec<usize> = order.iter().copied().chain(n..m).collect();
    u.permute_cols(&perm_u);
    v.permute_cols(&order);

    let f = cfg.format();
    Ok(SvdResult {
        u: u.to_cmatrix(),
        s: order.iter().map(|&i| f.to_f64(s[i])).collect(),
        v: v.to_cmatrix(),
        scale: a.scale(),
        steps,
    })
}
