//! Gate-level circuit IR.

mod aggregate;
mod commute;
mod decompose;
mod depth;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CircuitError;

pub use aggregate::{aggregate_frontier, crz_gates, Aggregation, Component, ComponentKind, MultiTargetGate};
pub use commute::{commuting_frontier, gates_commute, FrontierTracker, Role};
pub use decompose::{decompose_gate, decompose_to_basis};
pub use depth::{weighted_depth, Timeline};
pub use text::{parse_circuit, write_circuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Qubit(pub u32);

impl Qubit {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Qubit {
    fn from(i: usize) -> Self {
        Qubit(i as u32)
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clbit(pub u32);

impl Clbit {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Clbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

/// A single operation. Two-qubit gates list the control first; `Bridge` is
/// `(control, middle, target)`. `CondPauli` fires when the XOR of `bits` is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(Qubit),
    X(Qubit),
    Y(Qubit),
    Z(Qubit),
    S(Qubit),
    Sdg(Qubit),
    Rz(Qubit, f64),
    Ry(Qubit, f64),
    Cx(Qubit, Qubit),
    Cz(Qubit, Qubit),
    Cp(Qubit, Qubit, f64),
    Swap(Qubit, Qubit),
    Bridge(Qubit, Qubit, Qubit),
    Measure {
        qubit: Qubit,
        basis: Basis,
        bit: Clbit,
    },
    CondPauli {
        pauli: Pauli,
        qubit: Qubit,
        bits: Vec<Clbit>,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<Qubit> {
        match *self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::Rz(q, _)
            | Gate::Ry(q, _)
            | Gate::Measure { qubit: q, .. }
            | Gate::CondPauli { qubit: q, .. } => vec![q],
            Gate::Cx(a, b) | Gate::Cz(a, b) | Gate::Cp(a, b, _) | Gate::Swap(a, b) => vec![a, b],
            Gate::Bridge(a, b, c) => vec![a, b, c],
        }
    }

    /// Classical bits read (`CondPauli`) or written (`Measure`).
    pub fn bits(&self) -> &[Clbit] {
        match self {
            Gate::Measure { bit, .. } => std::slice::from_ref(bit),
            Gate::CondPauli { bits, .. } => bits,
            _ => &[],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(
            self,
            Gate::Cx(..) | Gate::Cz(..) | Gate::Cp(..) | Gate::Swap(..)
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::Rz(..) => "rz",
            Gate::Ry(..) => "ry",
            Gate::Cx(..) => "cx",
            Gate::Cz(..) => "cz",
            Gate::Cp(..) => "cp",
            Gate::Swap(..) => "swap",
            Gate::Bridge(..) => "bridge",
            Gate::Measure {
                basis: Basis::Z, ..
            } => "measure_z",
            Gate::Measure {
                basis: Basis::X, ..
            } => "measure_x",
            Gate::CondPauli { .. } => "cpauli",
        }
    }

    /// Same gate with every qubit passed through `f`.
    pub fn map_qubits(&self, mut f: impl FnMut(Qubit) -> Qubit) -> Gate {
        match self {
            Gate::H(q) => Gate::H(f(*q)),
            Gate::X(q) => Gate::X(f(*q)),
            Gate::Y(q) => Gate::Y(f(*q)),
            Gate::Z(q) => Gate::Z(f(*q)),
            Gate::S(q) => Gate::S(f(*q)),
            Gate::Sdg(q) => Gate::Sdg(f(*q)),
            Gate::Rz(q, t) => Gate::Rz(f(*q), *t),
            Gate::Ry(q, t) => Gate::Ry(f(*q), *t),
            Gate::Cx(a, b) => Gate::Cx(f(*a), f(*b)),
            Gate::Cz(a, b) => Gate::Cz(f(*a), f(*b)),
            Gate::Cp(a, b, t) => Gate::Cp(f(*a), f(*b), *t),
            Gate::Swap(a, b) => Gate::Swap(f(*a), f(*b)),
            Gate::Bridge(a, b, c) => Gate::Bridge(f(*a), f(*b), f(*c)),
            Gate::Measure { qubit, basis, bit } => Gate::Measure {
                qubit: f(*qubit),
                basis: *basis,
                bit: *bit,
            },
            Gate::CondPauli { pauli, qubit, bits } => Gate::CondPauli {
                pauli: *pauli,
                qubit: f(*qubit),
                bits: bits.clone(),
            },
        }
    }

    /// Same gate with every classical bit passed through `f`.
    pub fn map_bits(&self, mut f: impl FnMut(Clbit) -> Clbit) -> Gate {
        match self {
            Gate::Measure { qubit, basis, bit } => Gate::Measure {
                qubit: *qubit,
                basis: *basis,
                bit: f(*bit),
            },
            Gate::CondPauli { pauli, qubit, bits } => Gate::CondPauli {
                pauli: *pauli,
                qubit: *qubit,
                bits: bits.iter().map(|&b| f(b)).collect(),
            },
            other => other.clone(),
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::Rz(..) | Gate::Ry(..) | Gate::Cp(..))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub gate: Gate,
    /// Shuttle or gate-group id this operation was emitted for.
    pub tag: Option<u32>,
}

impl From<Gate> for GateOp {
    fn from(gate: Gate) -> Self {
        GateOp { gate, tag: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: u32,
    num_bits: u32,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits: num_qubits as u32,
            num_bits: 0,
            ops: Vec::new(),
        }
    }

    pub fn with_bits(num_qubits: usize, num_bits: usize) -> Self {
        Circuit {
            num_qubits: num_qubits as u32,
            num_bits: num_bits as u32,
            ops: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits as usize
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits as usize
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> + '_ {
        self.ops.iter().map(|op| &op.gate)
    }

    pub fn gate(&self, i: usize) -> &Gate {
        &self.ops[i].gate
    }

    pub fn push(&mut self, gate: Gate) {
        self.ops.push(gate.into());
    }

    pub fn push_tagged(&mut self, gate: Gate, tag: Option<u32>) {
        self.ops.push(GateOp { gate, tag });
    }

    pub fn push_op(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        self.ops.extend(gates.into_iter().map(GateOp::from));
    }

    /// Appends `other`, whose qubit and bit indices must already refer to
    /// this circuit.
    pub fn append(&mut self, other: &Circuit) {
        self.num_qubits = self.num_qubits.max(other.num_qubits);
        self.num_bits = self.num_bits.max(other.num_bits);
        self.ops.extend(other.ops.iter().cloned());
    }

    /// Appends `other` with its classical bits moved past this circuit's.
    pub fn append_fresh_bits(&mut self, other: &Circuit) {
        let off = self.num_bits;
        self.num_qubits = self.num_qubits.max(other.num_qubits);
        self.num_bits += other.num_bits;
        self.ops.extend(other.ops.iter().map(|op| GateOp {
            gate: op.gate.map_bits(|b| Clbit(b.0 + off)),
            tag: op.tag,
        }));
    }

    /// Relabels the used qubits to 0..k in ascending order; returns the
    /// compacted circuit and the original index of each new qubit.
    pub fn compact(&self) -> (Circuit, Vec<Qubit>) {
        let mut used: Vec<Qubit> = self.gates().flat_map(|g| g.qubits()).collect();
        used.sort();
        used.dedup();
        let mut index = vec![u32::MAX; self.num_qubits()];
        for (i, q) in used.iter().enumerate() {
            index[q.index()] = i as u32;
        }
        let mut out = Circuit::with_bits(used.len(), self.num_bits());
        for op in &self.ops {
            out.push_op(GateOp {
                gate: op.gate.map_qubits(|q| Qubit(index[q.index()])),
                tag: op.tag,
            });
        }
        (out, used)
    }

    pub fn alloc_bit(&mut self) -> Clbit {
        let b = Clbit(self.num_bits);
        self.num_bits += 1;
        b
    }

    pub fn set_num_bits(&mut self, n: usize) {
        self.num_bits = self.num_bits.max(n as u32);
    }

    pub fn set_num_qubits(&mut self, n: usize) {
        self.num_qubits = self.num_qubits.max(n as u32);
    }

    pub fn count_where(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates().filter(|g| pred(g)).count()
    }

    /// Checks qubit ranges, distinct operands and that every conditioned bit
    /// was written earlier.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut written = vec![false; self.num_bits()];
        for (index, gate) in self.gates().enumerate() {
            let qs = gate.qubits();
            for (i, q) in qs.iter().enumerate() {
                if q.0 >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        index,
                        qubit: q.0,
                        num_qubits: self.num_qubits,
                    });
                }
                if qs[..i].contains(q) {
                    return Err(CircuitError::RepeatedQubit { index, qubit: q.0 });
                }
            }
            for &b in gate.bits() {
                if b.0 >= self.num_bits {
                    return Err(CircuitError::BitOutOfRange {
                        index,
                        bit: b.0,
                        num_bits: self.num_bits,
                    });
                }
            }
            match gate {
                Gate::Measure { bit, .. } => written[bit.index()] = true,
                Gate::CondPauli { bits, .. } => {
                    if let Some(b) = bits.iter().find(|b| !written[b.index()]) {
                        return Err(CircuitError::UnwrittenBit { index, bit: b.0 });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
