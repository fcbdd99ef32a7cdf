//! Implicit-shift Golub-Kahan iteration on a real bidiagonal matrix.

use crate::cordic::CordicConfig;

use super::givens::{givens_from, PlaneRotation};
use super::matrix::{prescale_exponent, FixedMatrix};
use super::SvdError;

/// Absolute deflation floor in LSBs: the rounding term `I·2^(-F+1)` of the
/// rotation accuracy bound. Entries below it are rotation noise.
pub fn deflation_floor(cfg: &CordicConfig) -> i64 {
    2 * cfg.iterations() as i64
}

/// Outcome of [`diagonalize`]: the (signed, unsorted) diagonal and the number
/// of sweeps and chases used.
#[derive(Debug, Clone)]
pub struct Diagonal {
    pub s: Vec<i64>,
    pub steps: usize,
}

struct Dense {
    n: usize,
    b: Vec<i64>,
}

impl Dense {
    #[inline]
    fn at(&self, r: usize, c: usize) -> i64 {
        self.b[r * self.n + c]
    }

    #[inline]
    fn put(&mut self, r: usize, c: usize, v: i64) {
        self.b[r * self.n + c] = v;
    }

    fn rot_rows(
        &mut self,
        cfg: &CordicConfig,
        rot: &PlaneRotation,
        p: usize,
        q: usize,
        cols: std::ops::Range<usize>,
    ) {
        for c in cols {
            let (x, y) = rot.apply(cfg, self.at(p, c), self.at(q, c));
            self.put(p, c, x);
            self.put(q, c, y);
        }
    }

    fn rot_cols(
        &mut self,
        cfg: &CordicConfig,
        rot: &PlaneRotation,
        p: usize,
        q: usize,
        rows: std::ops::Range<usize>,
    ) {
        for r in rows {
            let (x, y) = rot.apply(cfg, self.at(r, p), self.at(r, q));
            self.put(r, p, x);
            self.put(r, q, y);
        }
    }
}

/// Drives the superdiagonal `e` to zero, accumulating left rotations into
/// the columns of `u` and right rotations into the columns of `v`.
///
/// A superdiagonal entry is negligible when `|e_i| <= 2^(-F+2)·(|d_i| +
/// |d_{i+1}|)` or when it is within [`deflation_floor`] of zero; a
/// diagonal entry within the same floor is treated as zero and chased out.
/// A sweep that leaves the block bit-identical splits it at its smallest
/// superdiagonal. The shift is computed in double precision from the current
/// words; every update of the matrix and of `u`, `v` goes through CORDIC.
pub fn diagonalize(
    cfg: &CordicConfig,
    d: &[i64],
    e: &[i64],
    u: &mut FixedMatrix,
    v: &mut FixedMatrix,
) -> Result<Diagonal, SvdError> {
    let n = d.len();
    assert_eq!(e.len(), n.saturating_sub(1), "superdiagonal length");
    let fmt = cfg.format();
    let frac = fmt.frac();
    let (m, vn) = (u.rows(), v.rows());
    let mut b = Dense {
        n,
        b: vec![0; n * n],
    };
    for i in 0..n {
        b.put(i, i, d[i]);
        if i + 1 < n {
            b.put(i, i + 1, e[i]);
        }
    }
    let cap = 30 * n.max(1);
    let mut steps = 0;
    let mut recent: Vec<Vec<i64>> = Vec::with_capacity(CYCLE_MEMORY);
    let floor = deflation_floor(cfg);
    let small_e = |e: i64, d1: i64, d2: i64| {
        let e = e.unsigned_abs() as u128;
        e <= floor as u128
            || (e << (frac - 2)) <= d1.unsigned_abs() as u128 + d2.unsigned_abs() as u128
    };

    loop {
        for i in 0..n.saturating_sub(1) {
            if b.at(i, i + 1) != 0 && small_e(b.at(i, i + 1), b.at(i, i), b.at(i + 1, i + 1)) {
                b.put(i, i + 1, 0);
            }
        }
        let mut hi = n.saturating_sub(1);
        while hi > 0 && b.at(hi - 1, hi) == 0 {
            hi -= 1;
        }
        if hi == 0 {
            break;
        }
        let mut lo = hi - 1;
        while lo > 0 && b.at(lo - 1, lo) != 0 {
            lo -= 1;
        }

        steps += 1;
        if steps > cap {
            let residual = (0..n - 1)
                .map(|i| fmt.to_f64(b.at(i, i + 1)).abs())
                .fold(0.0, f64::max);
            return Err(SvdError::NonConvergence {
                steps: cap,
                residual,
            });
        }

        if let Some(k) = (lo..=hi).find(|&k| b.at(k, k).abs() <= floor) {
            b.put(k, k, 0);
            if k < hi {
                for j in k + 1..=hi {
                    let g = givens_from(cfg, b.at(j, j), b.at(k, j))?;
                    b.put(j, j, g.r);
                    b.put(k, j, 0);
                    if j < hi {
                        b.rot_rows(cfg, &g.rotation, j, k, j + 1..j + 2);
                    }
                    u.rotate_cols(cfg, &g.rotation, j, k, 0..m);
                }
            } else {
                for j in (lo..hi).rev() {
                    let g = givens_from(cfg, b.at(j, j), b.at(j, hi))?;
                    b.put(j, j, g.r);
                    b.put(j, hi, 0);
                    if j > lo {
                        b.rot_cols(cfg, &g.rotation, j, hi, j - 1..j);
                    }
                    v.rotate_cols(cfg, &g.rotation, j, hi, 0..vn);
                }
            }
            continue;
        }

        if hi == lo + 1 && two_by_two(cfg, &mut b, lo, u, v, floor)? {
            continue;
        }
        gk_step(cfg, &mut b, lo, hi, u, v)?;
        if recent.contains(&b.b) {
            // A sweep that revisits a recent state would cycle forever: the
            // block has converged as far as the word length allows, so split
            // it at its smallest superdiagonal.
            let i = (lo..hi)
                .min_by_key(|&i| (b.at(i, i + 1).unsigned_abs(), i))
                .expect("block has a superdiagonal");
            b.put(i, i + 1, 0);
            recent.clear();
        } else {
            if recent.len() == CYCLE_MEMORY {
                recent.remove(0);
            }
            recent.push(b.b.clone());
        }
    }

    let s = (0..n).map(|i| b.at(i, i)).collect();
    Ok(Diagonal { s, steps })
}

/// Number of past sweep states checked for a cycle.
const CYCLE_MEMORY: usize = 4;

/// Diagonalizes the 2x2 block at `lo` with angles computed in double
/// precision from the current words. A shifted sweep on such a block takes
/// its left angle from a fill entry of a few LSB and can cycle. Returns
/// `false`, leaving everything untouched, when the leftover fill exceeds
/// `floor`.
fn two_by_two(
    cfg: &CordicConfig,
    b: &mut Dense,
    lo: usize,
    u: &mut FixedMatrix,
    v: &mut FixedMatrix,
    floor: i64,
) -> Result<bool, SvdError> {
    let fmt = cfg.format();
    let hi = lo + 1;
    let (f, g, h) = (
        fmt.to_f64(b.at(lo, lo)),
        fmt.to_f64(b.at(lo, hi)),
        fmt.to_f64(b.at(hi, hi)),
    );
    let beta = 0.5 * (2.0 * f * g).atan2(g * g + h * h - f * f);
    let (c, s) = (beta.cos(), beta.sin());
    let alpha = -(-s * h).atan2(c * f - s * g);
    let right = PlaneRotation::new(cfg, fmt.quantize(beta))?;
    let left = PlaneRotation::new(cfg, fmt.quantize(alpha))?;
    let saved = b.b.clone();
    b.rot_cols(cfg, &right, lo, hi, lo..hi + 1);
    b.rot_rows(cfg, &left, lo, hi, lo..hi + 1);
    if b.at(hi, lo).abs() > floor {
        b.b = saved;
        return Ok(false);
    }
    b.put(hi, lo, 0);
    v.rotate_cols(cfg, &right, lo, hi, 0..v.rows());
    u.rotate_cols(cfg, &left, lo, hi, 0..u.rows());
    Ok(true)
}

fn wilkinson_shift(cfg: &CordicConfig, b: &Dense, lo: usize, hi: usize) -> f64 {
    let f = |x: i64| cfg.format().to_f64(x);
    let dm = f(b.at(hi - 1, hi - 1));
    let dn = f(b.at(hi, hi));
    let em = f(b.at(hi - 1, hi));
    let ep = if hi - 1 > lo {
        f(b.at(hi - 2, hi - 1))
    } else {
        0.0
    };
    let t11 = dm * dm + ep * ep;
    let t22 = dn * dn + em * em;
    let t12 = dm * em;
    let delta = (t11 - t22) / 2.0;
    let den = delta + if delta >= 0.0 { 1.0 } else { -1.0 } * delta.hypot(t12);
    if den == 0.0 {
        t22
    } else {
        t22 - t12 * t12 / den
    }
}

fn gk_step(
    cfg: &CordicConfig,
    b: &mut Dense,
    lo: usize,
    hi: usize,
    u: &mut FixedMatrix,
    v: &mut FixedMatrix,
) -> Result<(), SvdError> {
    let fmt = cfg.format();
    let (m, vn) = (u.rows(), v.rows());
    let mu = wilkinson_shift(cfg, b, lo, hi);
    let dl = fmt.to_f64(b.at(lo, lo));
    let el = fmt.to_f64(b.at(lo, lo + 1));
    let y = dl * dl - mu;
    let z = dl * el;
    let k = (prescale_exponent(y.abs().max(z.abs())) as f64).exp2();
    let first = givens_from(cfg, fmt.quantize(y * k), fmt.quantize(z * k))?;
    b.rot_cols(cfg, &first.rotation, lo, lo + 1, lo..lo + 2);
    v.rotate_cols(cfg, &first.rotation, lo, lo + 1, 0..vn);

    for k in lo..hi {
        let g = givens_from(cfg, b.at(k, k), b.at(k + 1, k))?;
        b.put(k, k, g.r);
        b.put(k + 1, k, 0);
        b.rot_rows(cfg, &g.rotation, k, k + 1, k + 1..(k + 3).min(hi + 1));
        u.rotate_cols(cfg, &g.rotation, k, k + 1, 0..m);
        if k + 1 < hi {
            let g = givens_from(cfg, b.at(k, k + 1), b.at(k, k + 2))?;
            b.put(k, k + 1, g.r);
            b.put(k, k + 2, 0);
            b.rot_cols(cfg, &g.rotation, k + 1, k + 2, k + 1..k + 3);
            v.rotate_cols(cfg, &g.rotation, k + 1, k + 2, 0..vn);
        }
    }
    Ok(())
}
