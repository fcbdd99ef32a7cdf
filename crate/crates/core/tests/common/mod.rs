#![allow(dead_code)]

use music_lite::adders::{acla_cju_carry, acla_ecu_carry, CjuVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bit-list ACLA model: blocks as MSB-first arrays of operand bits.
pub fn oracle_block_carry(a: &[bool], b: &[bool], alg1: bool) -> bool {
    let k = a.len();
    let g = |i: usize| a[i] && b[i];
    let p = |i: usize| a[i] != b[i];
    let ecu = g(0) || (p(0) && g(1)) || (p(0) && p(1) && g(2));
    let any_low = (3..k).any(g);
    let ect = a[2] || b[2];
    let mut cju = any_low && p(0) && p(1) && ect;
    if alg1 {
        cju = cju && p(2);
    }
    ecu || cju
}

pub fn msb_first(v: u64, k: usize) -> Vec<bool> {
    (0..k).map(|i| (v >> (k - 1 - i)) & 1 == 1).collect()
}

pub fn oracle_acla(a: u64, b: u64, width: usize, k: usize, alg1: bool) -> u64 {
    let mut out = 0;
    let mut carry = 0;
    for j in 0..width / k {
        let m = (1u64 << k) - 1;
        let (ba, bb) = ((a >> (j * k)) & m, (b >> (j * k)) & m);
        out |= ((ba + bb + carry) & m) << (j * k);
        carry = oracle_block_carry(&msb_first(ba, k), &msb_first(bb, k), alg1) as u64;
    }
    out | (carry << width)
}

pub fn exact_block_carry(a: u64, b: u64, k: u32) -> bool {
    (a + b) >> k & 1 == 1
}

/// Uniform blocks conditioned on a generate at MSB-relative index `i`, none
/// below it, no ECU fire and the CJU's top gating (`P0·P1·ECT`) open. The
/// CJU then always predicts a carry; the prediction is right when no bit in
/// `3..i` kills the carry from bit `i` (a `0-0` pair).
pub fn eq7_frequency(k: usize, i: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut hits, mut n) = (0usize, 0usize);
    while n < trials {
        let a: u64 = rng.random::<u64>() & ((1 << k) - 1);
        let b: u64 = rng.random::<u64>() & ((1 << k) - 1);
        let (av, bv) = (msb_first(a, k), msb_first(b, k));
        let g = |j: usize| av[j] && bv[j];
        let p = |j: usize| av[j] != bv[j];
        if !g(i) || (i + 1..k).any(g) {
            continue;
        }
        if acla_ecu_carry(a, b, k as u32).unwrap() {
            continue;
        }
        if !(p(0) && p(1) && (av[2] || bv[2])) {
            continue;
        }
        n += 1;
        let cju = acla_cju_carry(a, b, k as u32, CjuVariant::Eq6).unwrap();
        assert!(cju);
        let survives = (3..i).all(|j| av[j] || bv[j]);
        if cju == survives {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}
