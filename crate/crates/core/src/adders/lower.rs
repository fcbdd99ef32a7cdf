//! Lower-part approximations: the low `L` sum bits are either the bitwise OR
//! of the operands or forced to zero, and the upper `width - L` bits are added
//! exactly with no carry from the lower part.

use super::bits::mask;

/// The external carry-in enters at bit 0, so it only reaches the exact upper
/// part when there is no approximate lower part.
#[inline]
fn upper_add(width: u32, l: u32, a: u64, b: u64, cin: bool) -> (u64, bool) {
    let upper_cin = l == 0 && cin;
    let s = (a >> l) + (b >> l) + upper_cin as u64;
    let uw = width - l;
    ((s & mask(uw)) << l, (s >> uw) & 1 == 1)
}

pub(crate) fn lower_or_eval(width: u32, l: u32, a: u64, b: u64, cin: bool) -> (u64, bool) {
    let (hi, cout) = upper_add(width, l, a, b, cin);
    (hi | ((a | b) & mask(l)), cout)
}

pub(crate) fn truncated_eval(width: u32, l: u32, a: u64, b: u64, cin: bool) -> (u64, bool) {
    upper_add(width, l, a, b, cin)
}

#[cfg(test)]
mod tests {
    use super::super::exact::ripple_eval;
    use super::*;

    #[test]
    fn zero_lower_bits_is_exact() {
        for a in 0u64..256 {
            for b in 0u64..256 {
                for cin in [false, true] {
                    let exact = ripple_eval(8, a, b, cin);
                    assert_eq!(lower_or_eval(8, 0, a, b, cin), exact);
                    assert_eq!(truncated_eval(8, 0, a, b, cin), exact);
                }
            }
        }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(lower_or_eval(8, 4, 0x0F, 0x01, false), (0x0F, false));
        assert_eq!(truncated_eval(8, 4, 0xFF, 0xFF, false), (0xE0, true));
    }
}
