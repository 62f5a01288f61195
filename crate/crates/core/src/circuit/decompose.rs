//! Lowering to the {1q, CX, measure, cpauli} basis.

use super::{Circuit, Gate, GateOp};

/// Two-qubit and three-qubit gates expand to CX plus single-qubit gates;
/// everything else is returned unchanged.
pub fn decompose_gate(g: &Gate) -> Vec<Gate> {
    match *g {
        Gate::Swap(a, b) => vec![Gate::Cx(a, b), Gate::Cx(b, a), Gate::Cx(a, b)],
        Gate::Bridge(c, m, t) => vec![
            Gate::Cx(c, m),
            Gate::Cx(m, t),
            Gate::Cx(c, m),
            Gate::Cx(m, t),
        ],
        Gate::Cz(a, b) => vec![Gate::H(b), Gate::Cx(a, b), Gate::H(b)],
        Gate::Cp(a, b, t) => vec![
            Gate::Rz(a, t / 2.0),
            Gate::Cx(a, b),
            Gate::Rz(b, -t / 2.0),
            Gate::Cx(a, b),
            Gate::Rz(b, t / 2.0),
        ],
        ref other => vec![other.clone()],
    }
}

pub fn decompose_to_basis(c: &Circuit) -> Circuit {
    let mut out = Circuit::with_bits(c.num_qubits(), c.num_bits());
    for op in c.ops() {
        for gate in decompose_gate(&op.gate) {
            out.push_op(GateOp { gate, tag: op.tag });
        }
    }
    out
}
