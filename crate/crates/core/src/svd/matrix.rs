//! Complex fixed-point matrices.

use num_complex::Complex64;

use crate::fixed::{FixedFormat, FixedWord};
use crate::linalg::CMatrix;

use super::givens::PlaneRotation;
use crate::cordic::CordicConfig;

/// One complex entry as a pair of words in a shared format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexFixed {
    pub re: FixedWord,
    pub im: FixedWord,
}

impl ComplexFixed {
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Row-major complex matrix of raw fixed-point words.
///
/// `scale` is the power-of-two exponent applied on ingest: the stored matrix
/// approximates `A · 2^scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedMatrix {
    rows: usize,
    cols: usize,
    format: FixedFormat,
    scale: i32,
    pub(crate) re: Vec<i64>,
    pub(crate) im: Vec<i64>,
}

impl FixedMatrix {
    pub fn zeros(rows: usize, cols: usize, format: FixedFormat) -> Self {
        FixedMatrix {
            rows,
            cols,
            format,
            scale: 0,
            re: vec![0; rows * cols],
            im: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, format: FixedFormat) -> Self {
        let mut m = Self::zeros(n, n, format);
        let one = format.quantize(1.0);
        for i in 0..n {
            m.re[i * n + i] = one;
        }
        m
    }

    /// Quantizes `a` after scaling it by the power of two that brings its
    /// Frobenius norm into `(1/2, 1]`. Scaling by a power of two is exact, so
    /// `2^k·A` yields the same stored words with `scale` shifted by `-k`.
    pub fn from_cmatrix(a: &CMatrix, format: FixedFormat) -> Self {
        let scale = prescale_exponent(a.frobenius_norm());
        let k = (scale as f64).exp2();
        let mut m = Self::zeros(a.rows(), a.cols(), format);
        m.scale = scale;
        for (i, z) in a.as_slice().iter().enumerate() {
            m.re[i] = format.quantize(z.re * k);
            m.im[i] = format.quantize(z.im * k);
        }
        m
    }

    /// Quantizes `a` as is, with `scale = 0`.
    pub fn from_cmatrix_unscaled(a: &CMatrix, format: FixedFormat) -> Self {
        let mut m = Self::zeros(a.rows(), a.cols(), format);
        for (i, z) in a.as_slice().iter().enumerate() {
            m.re[i] = format.quantize(z.re);
            m.im[i] = format.quantize(z.im);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn get(&self, r: usize, c: usize) -> ComplexFixed {
        let i = self.idx(r, c);
        ComplexFixed {
            re: FixedWord::from_raw(self.format, self.re[i]),
            im: FixedWord::from_raw(self.format, self.im[i]),
        }
    }

    /// Stored values, without undoing `scale`.
    pub fn to_cmatrix(&self) -> CMatrix {
        let f = self.format;
        CMatrix::from_fn(self.rows, self.cols, |r, c| {
            let i = r * self.cols + c;
            Complex64::new(f.to_f64(self.re[i]), f.to_f64(self.im[i]))
        })
    }

    /// Conjugate transpose, keeping format and scale.
    pub fn adjoint(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.format);
        t.scale = self.scale;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (s, d) = (self.idx(r, c), c * self.rows + r);
                t.re[d] = self.re[s];
                t.im[d] = self.format.wrap(-self.im[s]);
            }
        }
        t
    }

    #[inline]
    pub(crate) fn idx(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    #[inline]
    pub(crate) fn set(&mut self, r: usize, c: usize, re: i64, im: i64) {
        let i = self.idx(r, c);
        self.re[i] = re;
        self.im[i] = im;
    }

    /// Real rotation of rows `p` and `q` over columns `cols`, applied to the
    /// real and imaginary parts separately.
    pub(crate) fn rotate_rows(
        &mut self,
        cfg: &CordicConfig,
        rot: &PlaneRotation,
        p: usize,
        q: usize,
        cols: std::ops::Range<usize>,
    ) {
        if rot.is_identity() {
            return;
        }
        for c in cols {
            let (i, j) = (self.idx(p, c), self.idx(q, c));
            (self.re[i], self.re[j]) = rot.apply(cfg, self.re[i], self.re[j]);
            (self.im[i], self.im[j]) = rot.apply(cfg, self.im[i], self.im[j]);
        }
    }

    pub(crate) fn rotate_cols(
        &mut self,
        cfg: &CordicConfig,
        rot: &PlaneRotation,
        p: usize,
        q: usize,
        rows: std::ops::Range<usize>,
    ) {
        if rot.is_identity() {
            return;
        }
        for r in rows {
            let (i, j) = (self.idx(r, p), self.idx(r, q));
            (self.re[i], self.re[j]) = rot.apply(cfg, self.re[i], self.re[j]);
            (self.im[i], self.im[j]) = rot.apply(cfg, self.im[i], self.im[j]);
        }
    }

    /// Multiplies entries of row `r` by the unit phase `rot`.
    pub(crate) fn phase_row(
        &mut self,
        cfg: &CordicConfig,
        rot: &PlaneRotation,
        r: usize,
        cols: std::ops::Range<usize>,
    ) {
        if rot.is_identity() {
            return;
        }
        for c in cols {
            let i = self.idx(r, c);
            (self.re[i], self.im[i]) = rot.apply(cfg, self.re[i], self.im[i]);
        }
    }

    pub(crate) fn phase_col(
        &mut self,
        cfg: &CordicConfig,
        rot: &PlaneRotation,
        c: usize,
        rows: std::ops::Range<usize>,
    ) {
        if rot.is_identity() {
            return;
        }
        for r in rows {
            let i = self.idx(r, c);
            (self.re[i], self.im[i]) = rot.apply(cfg, self.re[i], self.im[i]);
        }
    }

    /// Exact negation of column `c`.
    pub(crate) fn negate_col(&mut self, c: usize) {
        for r in 0..self.rows {
            let i = self.idx(r, c);
            self.re[i] = self.format.wrap(-self.re[i]);
            self.im[i] = self.format.wrap(-self.im[i]);
        }
    }

    /// Reorders columns so that new column `k` is old column `perm[k]`.
    pub(crate) fn permute_cols(&mut self, perm: &[usize]) {
        let old = self.clone();
        for (k, &src) in perm.iter().enumerate() {
            for r in 0..self.rows {
                let (d, s) = (self.idx(r, k), old.idx(r, src));
                self.re[d] = old.re[s];
                self.im[d] = old.im[s];
            }
        }
    }
}

/// Exponent `e` with `norm · 2^e` in `(1/2, 1]`; 0 for a zero or non-finite norm.
pub(crate) fn prescale_exponent(norm: f64) -> i32 {
    if norm == 0.0 || !norm.is_finite() {
        return 0;
    }
    let mut e = -norm.log2().ceil() as i32;
    while norm * (e as f64).exp2() > 1.0 {
        e -= 1;
    }
    while norm * ((e + 1) as f64).exp2() <= 1.0 {
        e += 1;
    }
    e
}
