//! Gate-level adder netlists loaded from JSON.
//!
//! ```json
//! {
//!   "name": "rca2", "width": 2, "has_cin": true,
//!   "gates": [ {"id": "p0", "kind": "XOR", "in": ["a0", "b0"]}, ... ],
//!   "outputs": { "sum": ["s0", "s1"], "cout": "c2" }
//! }
//! ```
//!
//! Input pins are named `a0..a{w-1}`, `b0..b{w-1}` and, when `has_cin` is set,
//! `cin`. The tie-off signals `const0` and `const1` are always available.
//! Gate ids share one namespace with the pins. Gates may be listed in any
//! order; evaluation follows a topological order of the gate graph.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::cost::{GateCost, GateKind};

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("cannot read netlist {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("netlist parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("netlist width {0} outside 2..=63")]
    InvalidWidth(u32),
    #[error("netlist gate graph is cyclic (gate `{0}` is on or behind a cycle)")]
    Cyclic(String),
    #[error("netlist output {0} is not driven")]
    UndrivenOutput(String),
    #[error("netlist declares width {expected} but drives {found} sum bits")]
    WidthMismatch { expected: u32, found: usize },
    #[error("gate `{gate}` references unknown signal `{signal}`")]
    UnknownSignal { gate: String, signal: String },
    #[error("signal id `{0}` is defined more than once")]
    DuplicateId(String),
    #[error("gate `{gate}` of kind {kind} takes {expected} inputs, got {found}")]
    Arity {
        gate: String,
        kind: GateKind,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    id: String,
    kind: GateKind,
    #[serde(rename = "in")]
    inputs: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    #[serde(default)]
    sum: Vec<String>,
    #[serde(default)]
    cout: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetlist {
    name: String,
    width: u32,
    #[serde(default)]
    has_cin: bool,
    gates: Vec<RawGate>,
    outputs: RawOutputs,
}

#[derive(Debug, Clone, Copy)]
struct Op {
    kind: GateKind,
    x: u32,
    y: u32,
}

/// A validated, topologically ordered gate-level adder.
#[derive(Debug, Clone)]
pub struct Netlist {
    name: String,
    width: u32,
    has_cin: bool,
    gate_count: usize,
    cost: GateCost,
    // slot layout: const0, const1, a[0..w], b[0..w], cin, gates...
    ops: Vec<Op>,
    sum_slots: Vec<u32>,
    cout_slot: u32,
}

const CONST0: u32 = 0;
const CONST1: u32 = 1;

thread_local! {
    static SCRATCH: RefCell<Vec<u64>> = const { RefCell::new(Vec::new()) };
}

impl Netlist {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetlistError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| NetlistError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, NetlistError> {
        let raw: RawNetlist = serde_json::from_str(text).map_err(|e| NetlistError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::compile(raw)
    }

    fn compile(raw: RawNetlist) -> Result<Self, NetlistError> {
        let w = raw.width;
        if !(2..=super::bits::MAX_WIDTH).contains(&w) {
            return Err(NetlistError::InvalidWidth(w));
        }
        let mut slots: HashMap<String, u32> = HashMap::new();
        slots.insert("const0".into(), CONST0);
        slots.insert("const1".into(), CONST1);
        for i in 0..w {
            slots.insert(format!("a{i}"), 2 + i);
            slots.insert(format!("b{i}"), 2 + w + i);
        }
        let cin_slot = 2 + 2 * w;
        if raw.has_cin {
            slots.insert("cin".into(), cin_slot);
        }
        let first_gate = cin_slot + 1;

        let mut by_id: HashMap<&str, usize> = HashMap::new();
        for (idx, g) in raw.gates.iter().enumerate() {
            if slots.contains_key(&g.id) || by_id.insert(g.id.as_str(), idx).is_some() {
                return Err(NetlistError::DuplicateId(g.id.clone()));
            }
            if g.inputs.len() != g.kind.arity() {
                return Err(NetlistError::Arity {
                    gate: g.id.clone(),
                    kind: g.kind,
                    expected: g.kind.arity(),
                    found: g.inputs.len(),
                });
            }
            for s in &g.inputs {
                if !slots.contains_key(s) && !raw.gates.iter().any(|o| &o.id == s) {
                    return Err(NetlistError::UnknownSignal {
                        gate: g.id.clone(),
                        signal: s.clone(),
                    });
                }
            }
        }

        // Kahn's algorithm, stable in declaration order
        let n = raw.gates.len();
        let mut indegree = vec![0usize; n];
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (idx, g) in raw.gates.iter().enumerate() {
            for s in &g.inputs {
                if let Some(&src) = by_id.get(s.as_str()) {
                    indegree[idx] += 1;
                    fanout[src].push(idx);
                }
            }
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &t in &fanout[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.insert(t);
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap();
            return Err(NetlistError::Cyclic(raw.gates[stuck].id.clone()));
        }

        for (pos, &idx) in order.iter().enumerate() {
            slots.insert(raw.gates[idx].id.clone(), first_gate + pos as u32);
        }
        let ops = order
            .iter()
            .map(|&idx| {
                let g = &raw.gates[idx];
                let x = slots[&g.inputs[0]];
                let y = g.inputs.get(1).map_or(x, |s| slots[s]);
                Op { kind: g.kind, x, y }
            })
            .collect();

        if raw.outputs.sum.len() != w as usize {
            return Err(NetlistError::WidthMismatch {
                expected: w,
                found: raw.outputs.sum.len(),
            });
        }
        let mut sum_slots = Vec::with_capacity(w as usize);
        for (i, s) in raw.outputs.sum.iter().enumerate() {
            let slot = slots
                .get(s)
                .ok_or_else(|| NetlistError::UndrivenOutput(format!("sum[{i}] (`{s}`)")))?;
            sum_slots.push(*slot);
        }
        let cout_slot = match &raw.outputs.cout {
            None => return Err(NetlistError::UndrivenOutput("cout".into())),
            Some(s) => *slots
                .get(s)
                .ok_or_else(|| NetlistError::UndrivenOutput(format!("cout (`{s}`)")))?,
        };

        let mut counts = BTreeMap::new();
        for g in &raw.gates {
            *counts.entry(g.kind).or_insert(0u64) += 1;
        }

        Ok(Netlist {
            name: raw.name,
            width: w,
            has_cin: raw.has_cin,
            gate_count: n,
            cost: GateCost::from_counts(counts),
            ops,
            sum_slots,
            cout_slot,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn has_cin(&self) -> bool {
        self.has_cin
    }

    pub fn gate_count(&self) -> usize {
        self.gate_count
    }

    pub fn cost(&self) -> &GateCost {
        &self.cost
    }

    /// Evaluates up to 64 additions at once, one per bit lane.
    ///
    /// `a_bits[i]` holds bit `i` of every lane's `a` operand. Returns the sum
    /// bit-planes and the carry-out plane.
    pub fn eval_lanes(&self, a_bits: &[u64], b_bits: &[u64], cin: u64) -> (Vec<u64>, u64) {
        let w = self.width as usize;
        SCRATCH.with(|scratch| {
            let mut v = scratch.borrow_mut();
            self.fill(&mut v, a_bits, b_bits, cin);
            let sums = self
                .sum_slots
                .iter()
                .map(|&s| v[s as usize])
                .collect::<Vec<_>>();
            debug_assert_eq!(sums.len(), w);
            (sums, v[self.cout_slot as usize])
        })
    }

    fn fill(&self, v: &mut Vec<u64>, a_bits: &[u64], b_bits: &[u64], cin: u64) {
        let w = self.width as usize;
        v.clear();
        v.push(0);
        v.push(u64::MAX);
        v.extend_from_slice(&a_bits[..w]);
        v.extend_from_slice(&b_bits[..w]);
        v.push(if self.has_cin { cin } else { 0 });
        for op in &self.ops {
            let r = op.kind.apply(v[op.x as usize], v[op.y as usize]);
            v.push(r);
        }
    }

    /// Single addition; a carry-in is ignored when the netlist has no `cin` pin.
    pub fn eval(&self, a: u64, b: u64, cin: bool) -> (u64, bool) {
        let w = self.width as usize;
        SCRATCH.with(|scratch| {
            let mut v = scratch.borrow_mut();
            let mut ab = [0u64; 2 * super::bits::MAX_WIDTH as usize];
            for i in 0..w {
                ab[i] = (a >> i) & 1;
                ab[w + i] = (b >> i) & 1;
            }
            self.fill(&mut v, &ab[..w], &ab[w..2 * w], cin as u64);
            let mut sum = 0u64;
            for (i, &s) in self.sum_slots.iter().enumerate() {
                sum |= (v[s as usize] & 1) << i;
            }
            (sum, v[self.cout_slot as usize] & 1 == 1)
        })
    }
}
