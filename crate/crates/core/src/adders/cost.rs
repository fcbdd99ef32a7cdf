//! Unit-gate area and energy proxies.
//!
//! These numbers only carry meaning relative to each other. Weights follow the
//! usual unit-gate convention: two-input monotone gates count 1, XOR-type
//! gates 2, inverters and buffers 0.5.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
    Nand,
    Nor,
    Xnor,
    Buf,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Not,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xnor,
        GateKind::Buf,
    ];

    pub fn area_weight(self) -> f64 {
        match self {
            GateKind::Not | GateKind::Buf => 0.5,
            GateKind::And | GateKind::Or | GateKind::Nand | GateKind::Nor => 1.0,
            GateKind::Xor | GateKind::Xnor => 2.0,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Buf => 1,
            _ => 2,
        }
    }

    #[inline]
    pub(crate) fn apply(self, x: u64, y: u64) -> u64 {
        match self {
            GateKind::And => x & y,
            GateKind::Or => x | y,
            GateKind::Not => !x,
            GateKind::Xor => x ^ y,
            GateKind::Nand => !(x & y),
            GateKind::Nor => !(x | y),
            GateKind::Xnor => !(x ^ y),
            GateKind::Buf => x,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Xor => "XOR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xnor => "XNOR",
            GateKind::Buf => "BUF",
        };
        f.write_str(s)
    }
}

/// Switching-energy proxy per unit of area.
pub const ACTIVITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateCost {
    pub gate_counts: BTreeMap<GateKind, u64>,
    pub area_units: f64,
    pub energy_units: f64,
}

impl GateCost {
    pub fn from_counts(gate_counts: BTreeMap<GateKind, u64>) -> Self {
        let area_units = gate_counts
            .iter()
            .map(|(k, &n)| k.area_weight() * n as f64)
            .sum::<f64>();
        GateCost {
            gate_counts,
            area_units,
            energy_units: area_units * ACTIVITY,
        }
    }

    pub fn count(&self, kind: GateKind) -> u64 {
        self.gate_counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn total_gates(&self) -> u64 {
        self.gate_counts.values().sum()
    }
}

/// Incremental gate tally used by the structural models.
#[derive(Default)]
pub(crate) struct Tally(BTreeMap<GateKind, u64>);

impl Tally {
    pub fn add(&mut self, kind: GateKind, n: u64) -> &mut Self {
        if n > 0 {
            *self.0.entry(kind).or_insert(0) += n;
        }
        self
    }

    /// XOR, XOR, AND, AND, OR
    pub fn full_adders(&mut self, n: u64) -> &mut Self {
        self.add(GateKind::Xor, 2 * n)
            .add(GateKind::And, 2 * n)
            .add(GateKind::Or, n)
    }

    pub fn half_adders(&mut self, n: u64) -> &mut Self {
        self.add(GateKind::Xor, n).add(GateKind::And, n)
    }

    pub fn finish(self) -> GateCost {
        GateCost::from_counts(self.0)
    }
}

pub(crate) fn ripple_cost(width: u32) -> GateCost {
    let mut t = Tally::default();
    t.full_adders(width as u64);
    t.finish()
}

/// Per bit: propagate XOR, generate AND, sum XOR. Per in-group carry
/// `c[i+1]`: `(i+1)(i+2)/2` two-input ANDs and `i+1` ORs.
pub(crate) fn cla_cost(width: u32) -> GateCost {
    let mut t = Tally::default();
    t.add(GateKind::Xor, 2 * width as u64)
        .add(GateKind::And, width as u64);
    let mut base = 0;
    while base < width {
        let len = super::exact::CLA_GROUP.min(width - base) as u64;
        for i in 0..len {
            t.add(GateKind::And, (i + 1) * (i + 2) / 2)
                .add(GateKind::Or, i + 1);
        }
        base += len as u32;
    }
    t.finish()
}

/// Per block: a ripple sub-adder whose top carry logic is dropped (the
/// block's carry-out comes from ECU | CJU), ECU (3 AND, 2 OR), CJU
/// (`k - 4` ORs for the generate sum, one OR for ECT, 3 ANDs for the
/// product, plus one more AND for the `Alg1` variant) and the final OR. The
/// ECU and CJU reuse the sub-adder's propagate and generate signals.
pub(crate) fn acla_cost(width: u32, k: u32, alg1: bool) -> GateCost {
    let blocks = (width / k) as u64;
    let k = k as u64;
    let sub_and = 2 * k - 1;
    let sub_or = k - 1;
    let ecu_and = 3;
    let ecu_or = 2;
    let cju_and = 3 + alg1 as u64;
    let cju_or = (k - 4) + 1;
    let mut t = Tally::default();
    t.add(GateKind::Xor, 2 * k * blocks)
        .add(GateKind::And, (sub_and + ecu_and + cju_and) * blocks)
        .add(GateKind::Or, (sub_or + ecu_or + cju_or + 1) * blocks);
    t.finish()
}

/// `L` OR gates (LowerOr only) plus the exact upper adder. With an
/// approximate lower part the upper adder has no carry-in, so its lowest bit
/// is a half adder.
pub(crate) fn lower_cost(width: u32, l: u32, with_or: bool) -> GateCost {
    let mut t = Tally::default();
    if with_or {
        t.add(GateKind::Or, l as u64);
    }
    let upper = (width - l) as u64;
    if l == 0 {
        t.full_adders(upper);
    } else {
        t.half_adders(1).full_adders(upper - 1);
    }
    t.finish()
}
