//! Behavioral integer adder models: exact references, approximate families,
//! externally supplied gate netlists, error characterization and gate-cost
//! proxies.
//!
//! Adders are named with a compact `family:width[:params]` syntax:
//!
//! | spec             | model                                          |
//! |------------------|------------------------------------------------|
//! | `exact:16`       | ripple-carry, exact (alias `rca`)              |
//! | `cla:16`         | 4-bit-group carry-lookahead, exact             |
//! | `acla:16:4`      | approximate CLA, block size 4 (`:alg1` suffix selects the stricter CJU) |
//! | `loa:16:6`       | lower 6 bits ORed, upper bits exact            |
//! | `trunc:16:4`     | lower 4 bits zero, upper bits exact            |
//! | `netlist:f.json` | gate-level netlist file                        |

mod acla;
mod bits;
mod cost;
mod exact;
mod lower;
mod metrics;
mod netlist;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

pub use acla::{acla_cju_carry, acla_ecu_carry, p_correct, AclaParams, CjuVariant};
pub use bits::{BitVector, MAX_WIDTH};
pub use cost::{GateCost, GateKind, ACTIVITY};
pub use exact::add_exact;
pub use metrics::{
    characterize, CharacterizeMode, ErrorMetrics, CHARACTERIZE_CSV_HEADER, EXHAUSTIVE_CAP_BITS,
};
pub use netlist::{Netlist, NetlistError};

#[derive(Debug, Error)]
pub enum AdderError {
    #[error("adder width {0} outside 2..=63")]
    InvalidWidth(u32),
    #[error("operand widths differ: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },
    #[error("invalid adder configuration: {0}")]
    Config(String),
    #[error("invalid adder spec `{0}` (expected family:width[:params], e.g. acla:16:4)")]
    BadSpec(String),
    #[error(
        "exhaustive characterization of a {width}-bit adder needs 2^{} evaluations, above the \
         2^{cap} cap; use sampled mode instead",
        2 * width
    )]
    ExhaustiveCap { width: u32, cap: u32 },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Family tag of an [`AdderModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum AdderFamily {
    RippleExact,
    CarryLookaheadExact,
    Acla,
    LowerOr,
    Truncated,
    Netlist,
}

#[derive(Debug, Clone)]
enum Kind {
    Ripple,
    Cla,
    Acla(Arc<acla::AclaEval>),
    LowerOr(u32),
    Truncated(u32),
    Netlist(Arc<Netlist>),
}

/// A behavioral `width`-bit adder: `(a, b, cin) -> (sum, cout)`.
///
/// Evaluation is a pure function of its inputs.
#[derive(Debug, Clone)]
pub struct AdderModel {
    name: String,
    width: u32,
    kind: Kind,
    cost: GateCost,
}

impl AdderModel {
    pub fn ripple(width: u32) -> Result<Self, AdderError> {
        bits::check_width(width)?;
        Ok(Self::build(format!("exact:{width}"), width, Kind::Ripple))
    }

    pub fn cla(width: u32) -> Result<Self, AdderError> {
        bits::check_width(width)?;
        Ok(Self::build(format!("cla:{width}"), width, Kind::Cla))
    }

    pub fn acla(width: u32, params: AclaParams) -> Result<Self, AdderError> {
        bits::check_width(width)?;
        let k = params.block_size();
        if k > width || width % k != 0 {
            return Err(AdderError::Config(format!(
                "ACLA width {width} is not a multiple of block size {k}"
            )));
        }
        let name = match params.cju_variant() {
            CjuVariant::Eq6 => format!("acla:{width}:{k}"),
            CjuVariant::Alg1 => format!("acla:{width}:{k}:alg1"),
        };
        Ok(Self::build(
            name,
            width,
            Kind::Acla(Arc::new(acla::AclaEval::new(width, params))),
        ))
    }

    pub fn lower_or(width: u32, approx_bits: u32) -> Result<Self, AdderError> {
        Self::check_lower(width, approx_bits)?;
        Ok(Self::build(
            format!("loa:{width}:{approx_bits}"),
            width,
            Kind::LowerOr(approx_bits),
        ))
    }

    pub fn truncated(width: u32, approx_bits: u32) -> Result<Self, AdderError> {
        Self::check_lower(width, approx_bits)?;
        Ok(Self::build(
            format!("trunc:{width}:{approx_bits}"),
            width,
            Kind::Truncated(approx_bits),
        ))
    }

    pub fn from_netlist(netlist: Netlist) -> Self {
        let width = netlist.width();
        let name = netlist.name().to_string();
        Self::build(name, width, Kind::Netlist(Arc::new(netlist)))
    }

    /// Parses the `family:width[:params]` syntax. Netlist paths are resolved
    /// relative to the working directory.
    pub fn from_spec(spec: &str) -> Result<Self, AdderError> {
        let bad = || AdderError::BadSpec(spec.to_string());
        let (family, rest) = spec.split_once(':').ok_or_else(bad)?;
        if family.eq_ignore_ascii_case("netlist") {
            return Ok(Self::from_netlist(Netlist::load(rest)?));
        }
        let parts: Vec<&str> = rest.split(':').collect();
        let num = |i: usize| -> Result<u32, AdderError> {
            parts
                .get(i)
                .ok_or_else(bad)?
                .trim()
                .parse()
                .map_err(|_| bad())
        };
        let width = num(0)?;
        let arity = |n: usize| if parts.len() == n { Ok(()) } else { Err(bad()) };
        match family.to_ascii_lowercase().as_str() {
            "exact" | "rca" | "ripple" => arity(1).and_then(|_| Self::ripple(width)),
            "cla" => arity(1).and_then(|_| Self::cla(width)),
            "acla" => {
                let variant = match parts.get(2).map(|s| s.to_ascii_lowercase()) {
                    None => CjuVariant::Eq6,
                    Some(v) if v == "eq6" => CjuVariant::Eq6,
                    Some(v) if v == "alg1" => CjuVariant::Alg1,
                    Some(_) => return Err(bad()),
                };
                if parts.len() > 3 {
                    return Err(bad());
                }
                Self::acla(width, AclaParams::new(num(1)?, variant)?)
            }
            "loa" | "lower-or" | "lowor" => arity(2).and_then(|_| Self::lower_or(width, num(1)?)),
            "trunc" | "truncated" => arity(2).and_then(|_| Self::truncated(width, num(1)?)),
            _ => Err(bad()),
        }
    }

    fn check_lower(width: u32, l: u32) -> Result<(), AdderError> {
        bits::check_width(width)?;
        if l >= width {
            return Err(AdderError::Config(format!(
                "approximated lower bits {l} must be below width {width}"
            )));
        }
        Ok(())
    }

    fn build(name: String, width: u32, kind: Kind) -> Self {
        let cost = match &kind {
            Kind::Ripple => cost::ripple_cost(width),
            Kind::Cla => cost::cla_cost(width),
            Kind::Acla(e) => {
                let p = e.params();
                cost::acla_cost(width, p.block_size(), p.cju_variant() == CjuVariant::Alg1)
            }
            Kind::LowerOr(l) => cost::lower_cost(width, *l, true),
            Kind::Truncated(l) => cost::lower_cost(width, *l, false),
            Kind::Netlist(n) => n.cost().clone(),
        };
        AdderModel {
            name,
            width,
            kind,
            cost,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn family(&self) -> AdderFamily {
        match self.kind {
            Kind::Ripple => AdderFamily::RippleExact,
            Kind::Cla => AdderFamily::CarryLookaheadExact,
            Kind::Acla(..) => AdderFamily::Acla,
            Kind::LowerOr(_) => AdderFamily::LowerOr,
            Kind::Truncated(_) => AdderFamily::Truncated,
            Kind::Netlist(_) => AdderFamily::Netlist,
        }
    }

    /// True for the two exact families.
    pub fn is_exact(&self) -> bool {
        matches!(self.kind, Kind::Ripple | Kind::Cla)
    }

    pub fn cost(&self) -> &GateCost {
        &self.cost
    }

    /// Raw evaluation on the low `width` bits of `a` and `b`.
    #[inline]
    pub fn eval(&self, a: u64, b: u64, cin: bool) -> (u64, bool) {
        let w = self.width;
        let m = bits::mask(w);
        let (a, b) = (a & m, b & m);
        match &self.kind {
            Kind::Ripple => exact::ripple_eval(w, a, b, cin),
            // bit-identical to the gate-level lookahead, see `exact::cla_eval`
            Kind::Cla => exact::ripple_eval(w, a, b, cin),
            Kind::Acla(e) => e.eval(a, b, cin),
            Kind::LowerOr(l) => lower::lower_or_eval(w, *l, a, b, cin),
            Kind::Truncated(l) => lower::truncated_eval(w, *l, a, b, cin),
            Kind::Netlist(n) => n.eval(a, b, cin),
        }
    }

    pub fn add(
        &self,
        a: BitVector,
        b: BitVector,
        cin: bool,
    ) -> Result<(BitVector, bool), AdderError> {
        for v in [a, b] {
            if v.width() != self.width {
                return Err(AdderError::WidthMismatch {
                    left: self.width,
                    right: v.width(),
                });
            }
        }
        let (s, c) = self.eval(a.bits(), b.bits(), cin);
        Ok((BitVector::new(self.width, s)?, c))
    }
}

impl fmt::Display for AdderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for AdderModel {
    type Err = AdderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_spec(s)
    }
}
