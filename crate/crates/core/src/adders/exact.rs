//! Exact reference adders.

use super::bits::{mask, BitVector};
use super::AdderError;

/// Golden reference: true unsigned addition with carry.
pub fn add_exact(a: BitVector, b: BitVector, cin: bool) -> Result<(BitVector, bool), AdderError> {
    if a.width() != b.width() {
        return Err(AdderError::WidthMismatch {
            left: a.width(),
            right: b.width(),
        });
    }
    let (sum, cout) = ripple_eval(a.width(), a.bits(), b.bits(), cin);
    Ok((BitVector::new(a.width(), sum)?, cout))
}

#[inline]
pub(crate) fn ripple_eval(width: u32, a: u64, b: u64, cin: bool) -> (u64, bool) {
    let s = a + b + cin as u64;
    (s & mask(width), (s >> width) & 1 == 1)
}

/// Bits per lookahead group in the carry-lookahead baseline.
pub const CLA_GROUP: u32 = 4;

/// Gate-level carry-lookahead evaluation: 4-bit groups with fully expanded in-group
/// lookahead, group carries rippling between groups.
///
/// Inside a group, `c[i+1] = g[i] | p[i]g[i-1] | ... | p[i]..p[0]c[0]`.
#[cfg(test)]
pub(crate) fn cla_eval(width: u32, a: u64, b: u64, cin: bool) -> (u64, bool) {
    let g = a & b;
    let p = a ^ b;
    // carry into in-group position i (i == len is the group carry-out)
    let lookahead = |base: u32, i: u32, c0: bool| {
        let from_cin = c0 && (0..i).all(|j| bit(p, base + j));
        from_cin || (0..i).any(|j| bit(g, base + j) && (j + 1..i).all(|t| bit(p, base + t)))
    };
    let mut carries = 0u64; // carry into bit i, LSB-first
    let mut group_cin = cin;
    let mut base = 0;
    while base < width {
        let len = CLA_GROUP.min(width - base);
        for i in 0..len {
            if lookahead(base, i, group_cin) {
                carries |= 1 << (base + i);
            }
        }
        group_cin = lookahead(base, len, group_cin);
        base += len;
    }
    ((p ^ carries) & mask(width), group_cin)
}

#[cfg(test)]
fn bit(v: u64, i: u32) -> bool {
    (v >> i) & 1 == 1
}
