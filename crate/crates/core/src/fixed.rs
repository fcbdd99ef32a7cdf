//! Two's-complement fixed-point words.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FixedError {
    #[error("invalid fixed-point format: width {width}, frac {frac} (need 4 <= width <= 63, 2 <= frac <= width - 2)")]
    InvalidFormat { width: u32, frac: u32 },
    #[error("fixed-point formats differ: {0} vs {1}")]
    FormatMismatch(FixedFormat, FixedFormat),
    #[error("value {0} is not finite")]
    NotFinite(f64),
}

/// `width` total bits, of which `frac` are fraction bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedFormat {
    width: u32,
    frac: u32,
}

impl Default for FixedFormat {
    fn default() -> Self {
        FixedFormat {
            width: 16,
            frac: 13,
        }
    }
}

impl FixedFormat {
    pub fn new(width: u32, frac: u32) -> Result<Self, FixedError> {
        if !(4..=63).contains(&width) || frac < 2 || frac + 2 > width {
            return Err(FixedError::InvalidFormat { width, frac });
        }
        Ok(FixedFormat { width, frac })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn frac(&self) -> u32 {
        self.frac
    }

    /// Weight of one LSB, `2^-frac`.
    pub fn lsb(&self) -> f64 {
        (-(self.frac as f64)).exp2()
    }

    pub fn max_raw(&self) -> i64 {
        (1i64 << (self.width - 1)) - 1
    }

    pub fn min_raw(&self) -> i64 {
        -(1i64 << (self.width - 1))
    }

    /// Sign-extends the low `width` bits of `raw`.
    #[inline]
    pub fn wrap(&self, raw: i64) -> i64 {
        let s = 64 - self.width;
        (raw << s) >> s
    }

    /// Round-to-nearest quantization, saturating at the representable range.
    pub fn quantize(&self, v: f64) -> i64 {
        let r = (v * (self.frac as f64).exp2()).round();
        if r >= self.max_raw() as f64 {
            self.max_raw()
        } else if r <= self.min_raw() as f64 {
            self.min_raw()
        } else {
            r as i64
        }
    }

    pub fn to_f64(&self, raw: i64) -> f64 {
        raw as f64 * self.lsb()
    }
}

impl fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}.{}", self.width - self.frac - 1, self.frac)
    }
}

/// A value `raw · 2^-frac` with `raw` held in `format.width()` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedWord {
    format: FixedFormat,
    raw: i64,
}

impl FixedWord {
    /// Wraps `raw` into the format's width.
    pub fn from_raw(format: FixedFormat, raw: i64) -> Self {
        FixedWord {
            format,
            raw: format.wrap(raw),
        }
    }

    pub fn from_f64(format: FixedFormat, v: f64) -> Result<Self, FixedError> {
        if !v.is_finite() {
            return Err(FixedError::NotFinite(v));
        }
        Ok(FixedWord {
            format,
            raw: format.quantize(v),
        })
    }

    pub fn zero(format: FixedFormat) -> Self {
        FixedWord { format, raw: 0 }
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }

    pub fn raw(&self) -> i64 {
        self.raw
    }

    pub fn to_f64(&self) -> f64 {
        self.format.to_f64(self.raw)
    }

    /// Arithmetic (flooring) right shift.
    pub fn shr(&self, n: u32) -> Self {
        FixedWord {
            format: self.format,
            raw: self.raw >> n.min(63),
        }
    }

    /// Exact two's-complement negation with wraparound.
    pub fn neg_exact(&self) -> Self {
        Self::from_raw(self.format, self.raw.wrapping_neg())
    }

    pub(crate) fn check_same(&self, other: &FixedWord) -> Result<(), FixedError> {
        if self.format != other.format {
            return Err(FixedError::FormatMismatch(self.format, other.format));
        }
        Ok(())
    }
}

impl fmt::Display for FixedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_bounds() {
        assert!(FixedFormat::new(16, 13).is_ok());
        assert!(FixedFormat::new(16, 14).is_ok());
        assert!(FixedFormat::new(16, 15).is_err());
        assert!(FixedFormat::new(16, 1).is_err());
        assert!(FixedFormat::new(64, 20).is_err());
        assert_eq!(FixedFormat::default().to_string(), "Q2.13");
    }

    #[test]
    fn quantize_rounds_and_saturates() {
        let f = FixedFormat::default();
        assert_eq!(f.quantize(1.0), 8192);
        assert_eq!(f.quantize(0.5 / 8192.0 + 1e-12), 1);
        assert_eq!(f.quantize(100.0), 32767);
        assert_eq!(f.quantize(-100.0), -32768);
    }

    #[test]
    fn wrap_and_negate() {
        let f = FixedFormat::default();
        assert_eq!(FixedWord::from_raw(f, 0x8000).raw(), -32768);
        assert_eq!(FixedWord::from_raw(f, -32768).neg_exact().raw(), -32768);
        assert_eq!(FixedWord::from_raw(f, 5).neg_exact().raw(), -5);
        assert_eq!(FixedWord::from_raw(f, -5).shr(1).raw(), -3);
    }
}
