//! Circular CORDIC in rotation and vectoring mode.
//!
//! Every addition and subtraction, including the angle accumulator and the
//! gain-compensation multiplier, goes through the configured [`AdderModel`].
//! Subtraction is an exact two's-complement negation followed by an
//! approximate add. Shifts are arithmetic and by default round to nearest
//! with ties to even; see [`ShiftRounding`].
//!
//! The `*_raw` methods work on raw integers in the configured format and are
//! what the SVD uses; the [`FixedWord`] methods wrap them with format checks.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adders::AdderModel;
use crate::fixed::{FixedError, FixedFormat, FixedWord};

#[derive(Debug, Error)]
pub enum CordicError {
    #[error(transparent)]
    Fixed(#[from] FixedError),
    #[error("adder width {adder} does not match fixed-point width {format}")]
    AdderWidth { adder: u32, format: u32 },
    #[error("iteration count {0} outside 1..=62")]
    Iterations(u32),
    #[error("format {0} has no integer headroom for angles up to pi (need frac <= width - 3)")]
    AngleHeadroom(FixedFormat),
    #[error("angle {angle} rad outside the convergence range +-{limit} rad")]
    AngleOutOfRange { angle: f64, limit: f64 },
    #[error("quantized inverse gain is off by {0}")]
    GainQuantization(f64),
}

/// Rounding of the arithmetic right shifts in the iterations and in gain
/// compensation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftRounding {
    /// Toward minus infinity. Biases vectoring magnitudes upward by about
    /// two LSB per call.
    Floor,
    /// To nearest, ties up. Ties bias every shift upward, which drifts the
    /// phase of long rotation chains.
    Nearest,
    /// To nearest, ties to even.
    #[default]
    Even,
}

impl ShiftRounding {
    #[inline]
    pub fn shr(self, v: i64, n: u32) -> i64 {
        match self {
            ShiftRounding::Floor => v >> n,
            ShiftRounding::Nearest if n == 0 => v,
            ShiftRounding::Nearest => (v >> n) + ((v >> (n - 1)) & 1),
            ShiftRounding::Even if n == 0 => v,
            ShiftRounding::Even => {
                let q = v >> n;
                let r = v - (q << n);
                let half = 1i64 << (n - 1);
                q + i64::from(r > half || (r == half && q & 1 == 1))
            }
        }
    }
}

/// Word format, iteration count and shift rounding, without the adder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CordicSettings {
    pub width: u32,
    pub frac: u32,
    /// Defaults to `width`.
    pub iterations: Option<u32>,
    pub rounding: ShiftRounding,
}

impl Default for CordicSettings {
    fn default() -> Self {
        let f = FixedFormat::default();
        CordicSettings {
            width: f.width(),
            frac: f.frac(),
            iterations: None,
            rounding: ShiftRounding::default(),
        }
    }
}

impl CordicSettings {
    pub fn format(&self) -> Result<FixedFormat, CordicError> {
        Ok(FixedFormat::new(self.width, self.frac)?)
    }

    pub fn build(&self, adder: AdderModel) -> Result<CordicConfig, CordicError> {
        Ok(CordicConfig::new(self.format()?, self.iterations, adder)?.with_rounding(self.rounding))
    }
}

/// Direction bits of a rotation-mode run. The angle path only depends on the
/// target angle, so one plan can rotate many vectors by the same angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotationPlan {
    /// Bit `i` set means `d_i = +1`.
    dirs: u64,
}

#[derive(Debug, Clone)]
pub struct CordicConfig {
    format: FixedFormat,
    iterations: u32,
    angles: Vec<i64>,
    angle_limit: i64,
    pi: i64,
    half_pi: i64,
    gain: f64,
    inv_gain: i64,
    inv_gain_bits: u32,
    rounding: ShiftRounding,
    adder: AdderModel,
}

impl CordicConfig {
    /// `iterations` defaults to the word width.
    pub fn new(
        format: FixedFormat,
        iterations: Option<u32>,
        adder: AdderModel,
    ) -> Result<Self, CordicError> {
        if adder.width() != format.width() {
            return Err(CordicError::AdderWidth {
                adder: adder.width(),
                format: format.width(),
            });
        }
        if format.frac() + 3 > format.width() {
            return Err(CordicError::AngleHeadroom(format));
        }
        let iterations = iterations.unwrap_or(format.width());
        if !(1..=62).contains(&iterations) {
            return Err(CordicError::Iterations(iterations));
        }
        let angles: Vec<i64> = (0..iterations)
            .map(|i| format.quantize((-(i as f64)).exp2().atan()))
            .collect();
        let gain: f64 = (0..iterations)
            .map(|i| (1.0 + (-2.0 * i as f64).exp2()).sqrt())
            .product();
        let inv_gain_bits = (2 * format.frac()).min(62);
        let inv_gain = (gain.recip() * (inv_gain_bits as f64).exp2()).round() as i64;
        let residual = inv_gain as f64 * (-(inv_gain_bits as f64)).exp2() * gain - 1.0;
        if residual.abs() >= 2.0 * format.lsb() {
            return Err(CordicError::GainQuantization(residual));
        }
        Ok(CordicConfig {
            format,
            iterations,
            angle_limit: angles.iter().sum(),
            angles,
            pi: format.quantize(PI),
            half_pi: format.quantize(FRAC_PI_2),
            gain,
            inv_gain,
            inv_gain_bits,
            rounding: ShiftRounding::default(),
            adder,
        })
    }

    pub fn with_rounding(mut self, rounding: ShiftRounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn rounding(&self) -> ShiftRounding {
        self.rounding
    }

    /// Q2.13, 16 iterations, exact ripple adder.
    pub fn exact_default() -> Self {
        let f = FixedFormat::default();
        Self::new(
            f,
            None,
            AdderModel::ripple(f.width()).expect("16-bit adder"),
        )
        .expect("default CORDIC configuration")
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn adder(&self) -> &AdderModel {
        &self.adder
    }

    /// Quantized `atan(2^-i)`, non-increasing in `i`.
    pub fn angle_table(&self) -> &[i64] {
        &self.angles
    }

    /// `K = prod sqrt(1 + 2^-2i)`.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// `1/K` with `2F` fractional bits (at most 62).
    pub fn inv_gain_raw(&self) -> i64 {
        self.inv_gain
    }

    /// Sum of the angle table, the largest reachable rotation.
    pub fn convergence_limit(&self) -> f64 {
        self.format.to_f64(self.angle_limit)
    }

    pub fn pi_raw(&self) -> i64 {
        self.pi
    }

    #[inline]
    pub fn add_raw(&self, a: i64, b: i64) -> i64 {
        let (s, _) = self.adder.eval(a as u64, b as u64, false);
        self.format.wrap(s as i64)
    }

    #[inline]
    pub fn sub_raw(&self, a: i64, b: i64) -> i64 {
        self.add_raw(a, self.format.wrap(b.wrapping_neg()))
    }

    pub fn fx_add(&self, a: FixedWord, b: FixedWord) -> Result<FixedWord, CordicError> {
        self.check(&a)?;
        a.check_same(&b)?;
        Ok(FixedWord::from_raw(
            self.format,
            self.add_raw(a.raw(), b.raw()),
        ))
    }

    pub fn fx_sub(&self, a: FixedWord, b: FixedWord) -> Result<FixedWord, CordicError> {
        self.check(&a)?;
        a.check_same(&b)?;
        Ok(FixedWord::from_raw(
            self.format,
            self.sub_raw(a.raw(), b.raw()),
        ))
    }

    fn check(&self, w: &FixedWord) -> Result<(), CordicError> {
        if w.format() != self.format {
            return Err(FixedError::FormatMismatch(w.format(), self.format).into());
        }
        Ok(())
    }

    /// `v · 1/K` by an LSB-first shift-add over the bits of the constant,
    /// quantized to `2F` fractional bits: `acc <- acc/2 + b_j·v/2`.
    #[inline]
    pub fn gain_compensate_raw(&self, v: i64) -> i64 {
        let half = self.rounding.shr(v, 1);
        let mut acc = 0i64;
        for j in 0..self.inv_gain_bits {
            acc = self.rounding.shr(acc, 1);
            if (self.inv_gain >> j) & 1 == 1 {
                acc = self.add_raw(acc, half);
            }
        }
        acc
    }

    pub fn gain_compensate(&self, v: FixedWord) -> Result<FixedWord, CordicError> {
        self.check(&v)?;
        Ok(FixedWord::from_raw(
            self.format,
            self.gain_compensate_raw(v.raw()),
        ))
    }

    /// Runs the angle path for `theta` and records the directions.
    pub fn plan_raw(&self, theta: i64) -> Result<RotationPlan, CordicError> {
        if theta.abs() > self.angle_limit {
            return Err(CordicError::AngleOutOfRange {
                angle: self.format.to_f64(theta),
                limit: self.convergence_limit(),
            });
        }
        let mut z = theta;
        let mut dirs = 0u64;
        for (i, &a) in self.angles.iter().enumerate() {
            if z >= 0 {
                dirs |= 1 << i;
                z = self.sub_raw(z, a);
            } else {
                z = self.add_raw(z, a);
            }
        }
        Ok(RotationPlan { dirs })
    }

    /// Applies a planned rotation to one vector, gain-compensated.
    #[inline]
    pub fn apply_raw(&self, plan: RotationPlan, x: i64, y: i64) -> (i64, i64) {
        let (mut x, mut y) = (x, y);
        for i in 0..self.iterations {
            let xs = self.rounding.shr(x, i as u32);
            let ys = self.rounding.shr(y, i as u32);
            if (plan.dirs >> i) & 1 == 1 {
                (x, y) = (self.sub_raw(x, ys), self.add_raw(y, xs));
            } else {
                (x, y) = (self.add_raw(x, ys), self.sub_raw(y, xs));
            }
        }
        (self.gain_compensate_raw(x), self.gain_compensate_raw(y))
    }

    pub fn rotate_raw(&self, x: i64, y: i64, theta: i64) -> Result<(i64, i64), CordicError> {
        Ok(self.apply_raw(self.plan_raw(theta)?, x, y))
    }

    /// Rotation by any angle in `[-pi, pi]`: angles beyond `pi/2` are reduced
    /// by `pi` and the result negated.
    pub fn plan_any_raw(&self, theta: i64) -> Result<(RotationPlan, bool), CordicError> {
        if theta > self.half_pi {
            Ok((self.plan_raw(self.sub_raw(theta, self.pi))?, true))
        } else if theta < -self.half_pi {
            Ok((self.plan_raw(self.add_raw(theta, self.pi))?, true))
        } else {
            Ok((self.plan_raw(theta)?, false))
        }
    }

    #[inline]
    pub fn apply_any_raw(&self, plan: (RotationPlan, bool), x: i64, y: i64) -> (i64, i64) {
        let (x, y) = self.apply_raw(plan.0, x, y);
        if plan.1 {
            (self.format.wrap(-x), self.format.wrap(-y))
        } else {
            (x, y)
        }
    }

    /// Vectoring mode: `(|v|, atan2(y, x))`, gain-compensated. Vectors with
    /// `x < 0` are negated first and the angle corrected by `+-pi`.
    pub fn vector_raw(&self, x: i64, y: i64) -> (i64, i64) {
        let (r, z, _) = self.vector_plan_raw(x, y);
        (r, z)
    }

    /// Vectoring that also returns its direction bits and fold, as a plan
    /// that rotates `(x, y)` onto the positive x axis. Replaying the plan on
    /// other pairs applies exactly the micro-rotations that zeroed `y`.
    pub fn vector_plan_raw(&self, x: i64, y: i64) -> (i64, i64, (RotationPlan, bool)) {
        if x == 0 && y == 0 {
            return (0, 0, (RotationPlan { dirs: 0 }, false));
        }
        let fold = x < 0;
        let (mut x, mut y, mut z) = if fold {
            let half_turn = if y >= 0 { self.pi } else { -self.pi };
            (self.format.wrap(-x), self.format.wrap(-y), half_turn)
        } else {
            (x, y, 0)
        };
        let mut dirs = 0u64;
        for (i, &a) in self.angles.iter().enumerate() {
            let xs = self.rounding.shr(x, i as u32);
            let ys = self.rounding.shr(y, i as u32);
            if y < 0 {
                dirs |= 1 << i;
                (x, y, z) = (self.sub_raw(x, ys), self.add_raw(y, xs), self.sub_raw(z, a));
            } else {
                (x, y, z) = (self.add_raw(x, ys), self.sub_raw(y, xs), self.add_raw(z, a));
            }
        }
        (
            self.gain_compensate_raw(x),
            z,
            (RotationPlan { dirs }, fold),
        )
    }

    /// The plan with every direction reversed.
    pub fn invert_plan(&self, plan: RotationPlan) -> RotationPlan {
        let mask = if self.iterations >= 64 {
            u64::MAX
        } else {
            (1u64 << self.iterations) - 1
        };
        RotationPlan {
            dirs: !plan.dirs & mask,
        }
    }

    pub fn rotate(
        &self,
        x: FixedWord,
        y: FixedWord,
        theta: FixedWord,
    ) -> Result<(FixedWord, FixedWord), CordicError> {
        for w in [&x, &y, &theta] {
            self.check(w)?;
        }
        let (xr, yr) = self.rotate_raw(x.raw(), y.raw(), theta.raw())?;
        Ok((
            FixedWord::from_raw(self.format, xr),
            FixedWord::from_raw(self.format, yr),
        ))
    }

    pub fn vector(
        &self,
        x: FixedWord,
        y: FixedWord,
    ) -> Result<(FixedWord, FixedWord), CordicError> {
        self.check(&x)?;
        self.check(&y)?;
        let (m, a) = self.vector_raw(x.raw(), y.raw());
        Ok((
            FixedWord::from_raw(self.format, m),
            FixedWord::from_raw(self.format, a),
        ))
    }

    /// Component bound for rotation under the exact adder:
    /// `2^-(I-1) + I·2^(-F+1)`.
    pub fn accuracy_bound(&self) -> f64 {
        (-(self.iterations as f64 - 1.0)).exp2()
            + self.iterations as f64 * (1.0 - self.format.frac() as f64).exp2()
    }
}

/// Convenience wrapper over [`CordicConfig::rotate`].
pub fn cordic_rotate(
    x0: FixedWord,
    y0: FixedWord,
    theta: FixedWord,
    cfg: &CordicConfig,
) -> Result<(FixedWord, FixedWord), CordicError> {
    cfg.rotate(x0, y0, theta)
}

/// Convenience wrapper over [`CordicConfig::vector`].
pub fn cordic_vector(
    x0: FixedWord,
    y0: FixedWord,
    cfg: &CordicConfig,
) -> Result<(FixedWord, FixedWord), CordicError> {
    cfg.vector(x0, y0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fw(c: &CordicConfig, v: f64) -> FixedWord {
        FixedWord::from_f64(c.format(), v).unwrap()
    }

    #[test]
    fn identity_rotation() {
        let c = CordicConfig::exact_default();
        let (x, y) = c.rotate(fw(&c, 1.0), fw(&c, 0.0), fw(&c, 0.0)).unwrap();
        let tol = (3.0 - 13.0f64).exp2();
        assert!((x.to_f64() - 1.0).abs() <= tol);
        assert!(y.to_f64().abs() <= tol);
    }

    #[test]
    fn quarter_pi() {
        let c = CordicConfig::exact_default();
        let (x, y) = c
            .rotate(
                fw(&c, 1.0),
                fw(&c, 0.0),
                fw(&c, std::f64::consts::FRAC_PI_4),
            )
            .unwrap();
        let b = c.accuracy_bound();
        assert!((x.to_f64() - 0.5f64.sqrt()).abs() <= b);
        assert!((y.to_f64() - 0.5f64.sqrt()).abs() <= b);
    }

    #[test]
    fn vectoring_examples() {
        let c = CordicConfig::exact_default();
        let tol = 4.0 * c.format().lsb();
        let (m, a) = c.vector(fw(&c, 1.0), fw(&c, 0.0)).unwrap();
        assert!((m.to_f64() - 1.0).abs() <= tol && a.to_f64().abs() <= tol);
        let (m, a) = c.vector(fw(&c, 1.0), fw(&c, 1.0)).unwrap();
        assert!((m.to_f64() - 2f64.sqrt()).abs() <= tol);
        assert!((a.to_f64() - 0.785398).abs() <= tol);
        let (m, a) = c.vector(fw(&c, -1.0), fw(&c, 0.0)).unwrap();
        assert!((m.to_f64() - 1.0).abs() <= tol);
        assert_eq!(a.raw(), c.pi_raw());
        assert_eq!(c.vector_raw(0, 0), (0, 0));
    }

    #[test]
    fn gain_compensation() {
        let c = CordicConfig::exact_default();
        let k = fw(&c, c.gain());
        let one = c.gain_compensate(k).unwrap().to_f64();
        assert!((one - 1.0).abs() <= 4.0 * c.format().lsb());
        assert_eq!(c.gain_compensate_raw(0), 0);
    }

    #[test]
    fn angle_table_non_increasing() {
        let c = CordicConfig::exact_default();
        assert!(c.angle_table().windows(2).all(|w| w[0] >= w[1]));
        assert!((c.convergence_limit() - 1.7433).abs() < 1e-3);
    }

    #[test]
    fn out_of_range_angle_rejected() {
        let c = CordicConfig::exact_default();
        assert!(c.rotate(fw(&c, 1.0), fw(&c, 0.0), fw(&c, 2.0)).is_err());
    }

    #[test]
    fn fx_sub_self_is_zero() {
        let c = CordicConfig::exact_default();
        for r in [-32768i64, -1, 0, 1, 12345, 32767] {
            let w = FixedWord::from_raw(c.format(), r);
            assert_eq!(c.fx_sub(w, w).unwrap().raw(), 0);
        }
    }

    #[test]
    fn mismatched_adder_width() {
        let f = FixedFormat::default();
        assert!(CordicConfig::new(f, None, AdderModel::ripple(8).unwrap()).is_err());
        let tight = FixedFormat::new(16, 14).unwrap();
        assert!(CordicConfig::new(tight, None, AdderModel::ripple(16).unwrap()).is_err());
    }
}
