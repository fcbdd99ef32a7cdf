use std::fmt;

use super::AdderError;

/// Widest word any adder model accepts. Sum plus carry must fit in a `u64`.
pub const MAX_WIDTH: u32 = 63;

/// Bit mask covering the low `width` bits.
#[inline]
pub(crate) fn mask(width: u32) -> u64 {
    (1u64 << width) - 1
}

/// A fixed-width two's-complement bit pattern.
///
/// The stored value is always masked to `width` bits, so `BitVector::new(8, 0x1FF)`
/// holds `0xFF`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    width: u32,
    bits: u64,
}

impl BitVector {
    pub fn new(width: u32, value: u64) -> Result<Self, AdderError> {
        check_width(width)?;
        Ok(BitVector {
            width,
            bits: value & mask(width),
        })
    }

    /// Builds a vector from a signed value, wrapping it into `width` bits.
    pub fn from_signed(width: u32, value: i64) -> Result<Self, AdderError> {
        Self::new(width, value as u64)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Two's-complement interpretation.
    pub fn to_signed(&self) -> i64 {
        let shift = 64 - self.width;
        ((self.bits << shift) as i64) >> shift
    }

    /// Bit `i`, LSB-first.
    pub fn bit(&self, i: u32) -> bool {
        i < self.width && (self.bits >> i) & 1 == 1
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({}'h{:x})", self.width, self.bits)
    }
}

pub(crate) fn check_width(width: u32) -> Result<(), AdderError> {
    if (2..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(AdderError::InvalidWidth(width))
    }
}
