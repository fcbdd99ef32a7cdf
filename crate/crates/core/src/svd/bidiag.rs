//! Reduction of a complex matrix to real upper bidiagonal form.

use crate::cordic::CordicConfig;

use super::givens::{givens_from, phase_normalize};
use super::matrix::FixedMatrix;
use super::SvdError;

/// `A = U · B · V^H` with `B` real, upper bidiagonal, `d` on the diagonal and
/// `e` above it.
#[derive(Debug, Clone)]
pub struct Bidiagonal {
    /// The transformed matrix; only its bidiagonal band is nonzero.
    pub b: FixedMatrix,
    pub d: Vec<i64>,
    pub e: Vec<i64>,
    pub u: FixedMatrix,
    pub v: FixedMatrix,
}

/// Column `j` is cleared below the diagonal by phase-normalizing every row so
/// the column is real, then rotating adjacent row pairs bottom-up. Row `j` is
/// cleared right of the superdiagonal the same way with column operations.
/// Each left operation is mirrored onto the columns of `U`, each right
/// operation onto the columns of `V`, as it is generated.
pub fn bidiagonalize(cfg: &CordicConfig, a: &FixedMatrix) -> Result<Bidiagonal, SvdError> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(SvdError::Shape { rows: m, cols: n });
    }
    let f = a.format();
    let mut a = a.clone();
    let mut u = FixedMatrix::identity(m, f);
    let mut v = FixedMatrix::identity(n, f);

    for j in 0..n {
        for i in j..m {
            let k = a.idx(i, j);
            let (mag, _, rot) = phase_normalize(cfg, a.re[k], a.im[k])?;
            if rot.is_identity() {
                continue;
            }
            a.set(i, j, mag, 0);
            a.phase_row(cfg, &rot, i, j + 1..n);
            u.phase_col(cfg, &rot.inverse(cfg), i, 0..m);
        }
        for i in (j..m - 1).rev() {
            let g = givens_from(cfg, a.re[a.idx(i, j)], a.re[a.idx(i + 1, j)])?;
            if g.rotation.is_identity() {
                continue;
            }
            a.set(i, j, g.r, 0);
            a.set(i + 1, j, 0, 0);
            a.rotate_rows(cfg, &g.rotation, i, i + 1, j + 1..n);
            u.rotate_cols(cfg, &g.rotation, i, i + 1, 0..m);
        }

        if j + 1 >= n {
            continue;
        }
        for k in j + 1..n {
            let x = a.idx(j, k);
            let (mag, _, rot) = phase_normalize(cfg, a.re[x], a.im[x])?;
            if rot.is_identity() {
                continue;
            }
            a.set(j, k, mag, 0);
            a.phase_col(cfg, &rot, k, j + 1..m);
            v.phase_col(cfg, &rot, k, 0..n);
        }
        for k in (j + 1..n - 1).rev() {
            let g = givens_from(cfg, a.re[a.idx(j, k)], a.re[a.idx(j, k + 1)])?;
            if g.rotation.is_identity() {
                continue;
            }
            a.set(j, k, g.r, 0);
            a.set(j, k + 1, 0, 0);
            a.rotate_cols(cfg, &g.rotation, k, k + 1, j + 1..m);
            v.rotate_cols(cfg, &g.rotation, k, k + 1, 0..n);
        }
    }

    let d = (0..n).map(|i| a.re[a.idx(i, i)]).collect();
    let e = (0..n.saturating_sub(1))
        .map(|i| a.re[a.idx(i, i + 1)])
        .collect();
    Ok(Bidiagonal { b: a, d, e, u, v })
}
