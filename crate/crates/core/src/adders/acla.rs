//! Approximate carry-lookahead adder (ACLA).
//!
//! The word is split into `width / k` blocks. Each block predicts its own
//! carry-out from its own operand bits only, as the OR of an Exact Carry Unit
//! (ECU) and a Carry Judge Unit (CJU). The predicted carry of block `j - 1`
//! feeds only the sub-adder of block `j`; it never enters block `j`'s carry
//! prediction.
//!
//! Bit indexing inside a block is MSB-first: index 0 is the block's most
//! significant bit, index `k - 1` its least significant. The ECU looks at
//! indices 0..=2, the CJU at indices 3..k together with the propagate terms of
//! indices 0 and 1 and the error-correction term of index 2.

use serde::{Deserialize, Serialize};

use super::bits::mask;
use super::AdderError;

/// Which CJU formula to use.
///
/// `Eq6` is `(Σ G_i) · P0 · P1 · ECT`; `Alg1` additionally multiplies by `P2`.
/// Since `P2` implies `ECT`, `Alg1` fires on a subset of the cases `Eq6` does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum CjuVariant {
    #[default]
    Eq6,
    Alg1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AclaParams {
    block_size: u32,
    cju_variant: CjuVariant,
}

impl AclaParams {
    pub fn new(block_size: u32, cju_variant: CjuVariant) -> Result<Self, AdderError> {
        if block_size < 4 {
            return Err(AdderError::Config(format!(
                "ACLA block size must be at least 4, got {block_size}"
            )));
        }
        Ok(AclaParams {
            block_size,
            cju_variant,
        })
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    pub fn cju_variant(&self) -> CjuVariant {
        self.cju_variant
    }
}

/// Bit `i` of a `k`-bit block, MSB-first.
#[inline]
fn msb_bit(v: u64, i: u32, k: u32) -> bool {
    (v >> (k - 1 - i)) & 1 == 1
}

fn check_block(k: u32) -> Result<(), AdderError> {
    if (4..=super::bits::MAX_WIDTH).contains(&k) {
        Ok(())
    } else {
        Err(AdderError::Config(format!(
            "ACLA block size must be in 4..=63, got {k}"
        )))
    }
}

/// Exact Carry Unit: `G0 + P0·G1 + P0·P1·G2` over the top three bits.
pub fn acla_ecu_carry(block_a: u64, block_b: u64, k: u32) -> Result<bool, AdderError> {
    check_block(k)?;
    Ok(ecu(block_a & mask(k), block_b & mask(k), k))
}

/// Carry Judge Unit over the bits below the top three.
pub fn acla_cju_carry(
    block_a: u64,
    block_b: u64,
    k: u32,
    variant: CjuVariant,
) -> Result<bool, AdderError> {
    check_block(k)?;
    Ok(cju(block_a & mask(k), block_b & mask(k), k, variant))
}

#[inline]
pub(crate) fn ecu(a: u64, b: u64, k: u32) -> bool {
    let g = |i| msb_bit(a, i, k) & msb_bit(b, i, k);
    let p = |i| msb_bit(a, i, k) ^ msb_bit(b, i, k);
    g(0) | (p(0) & g(1)) | (p(0) & p(1) & g(2))
}

#[inline]
pub(crate) fn cju(a: u64, b: u64, k: u32, variant: CjuVariant) -> bool {
    // MSB-first indices 3..k are the low k-3 bits of the block
    let factor = (a & b & mask(k - 3)) != 0;
    let p = |i| msb_bit(a, i, k) ^ msb_bit(b, i, k);
    let ect = msb_bit(a, 2, k) | msb_bit(b, 2, k);
    let gate = match variant {
        CjuVariant::Eq6 => p(0) & p(1) & ect,
        CjuVariant::Alg1 => p(0) & p(1) & p(2) & ect,
    };
    factor & gate
}

/// Predicted block carry-out, `C_ECU | C_CJU`.
#[cfg(test)]
pub(crate) fn block_carry(a: u64, b: u64, k: u32, variant: CjuVariant) -> bool {
    ecu(a, b, k) | cju(a, b, k, variant)
}

/// Per-model evaluation state: masks selecting each MSB-relative bit index
/// in every block at once, so all block carries come out of a handful of
/// word-wide operations.
#[derive(Debug, Clone)]
pub(crate) struct AclaEval {
    params: AclaParams,
    width: u32,
    /// Index 0 (block MSB), 1 and 2 of every block.
    m0: u64,
    m1: u64,
    m2: u64,
    /// Indices 3..k of every block, i.e. `2^(k-3) - 1` per block.
    low: u64,
}

impl AclaEval {
    pub(crate) fn new(width: u32, params: AclaParams) -> Self {
        let k = params.block_size;
        let mut e = AclaEval {
            params,
            width,
            m0: 0,
            m1: 0,
            m2: 0,
            low: 0,
        };
        for j in 0..width / k {
            let base = j * k;
            e.m0 |= 1 << (base + k - 1);
            e.m1 |= 1 << (base + k - 2);
            e.m2 |= 1 << (base + k - 3);
            e.low |= mask(k - 3) << base;
        }
        e
    }

    pub(crate) fn params(&self) -> AclaParams {
        self.params
    }

    /// Predicted carry-out of every block, at the block's MSB position.
    #[inline]
    fn block_carries(&self, a: u64, b: u64) -> u64 {
        let g = a & b;
        let p = a ^ b;
        let g0 = g & self.m0;
        let g1 = (g & self.m1) << 1;
        let g2 = (g & self.m2) << 2;
        let p0 = p & self.m0;
        let p1 = (p & self.m1) << 1;
        let ecu = g0 | (p0 & g1) | (p0 & p1 & g2);
        // a nonzero low field carries into index 2 when all-ones is added
        let any_low = (((g & self.low) + self.low) & self.m2) << 2;
        let ect = ((a | b) & self.m2) << 2;
        let mut cju = any_low & p0 & p1 & ect;
        if self.params.cju_variant == CjuVariant::Alg1 {
            cju &= (p & self.m2) << 2;
        }
        ecu | cju
    }

    /// Each block carry enters the next block's LSB. Block sums are one add
    /// with the block MSBs cleared, so nothing crosses a block boundary, and
    /// the MSBs restored by XOR.
    #[inline]
    pub(crate) fn eval(&self, a: u64, b: u64, cin: bool) -> (u64, bool) {
        let w = mask(self.width);
        let carries = self.block_carries(a, b);
        let cout = (carries >> (self.width - 1)) & 1 == 1;
        let injected = ((carries << 1) & w) | cin as u64;
        let low = (a & !self.m0) + (b & !self.m0) + injected;
        ((low ^ ((a ^ b) & self.m0)) & w, cout)
    }
}

/// Probability that the CJU correctly predicts a carry generated at
/// MSB-relative index `i`: each of the `i - 3` bits between it and the CJU's
/// window passes the carry unless both operand bits are zero.
pub fn p_correct(i: u32) -> Result<f64, AdderError> {
    if i < 3 {
        return Err(AdderError::Config(format!(
            "bit index {i} belongs to the ECU window (indices 0..=2)"
        )));
    }
    Ok(0.75f64.powi((i - 3) as i32))
}
