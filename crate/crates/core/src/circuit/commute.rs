//! Syntactic commutation rules and the commuting frontier.
//!
//! Every gate acts on each of its wires (qubits and classical bits) in one of
//! a few roles. Two gates commute when every shared wire carries the same
//! non-opaque role for both.

use super::{Circuit, Gate, Pauli};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Diagonal in Z: CX control, CZ/CP operands, Z/S/RZ.
    Diag,
    /// Diagonal in X: CX target, X.
    Flip,
    /// Classical bit read by a conditional Pauli.
    Read,
    /// Commutes with nothing on this wire.
    Opaque,
}

/// Wire numbering: qubits first, then classical bits offset by `num_qubits`.
pub(crate) fn wire_roles(g: &Gate, num_qubits: usize) -> Vec<(usize, Role)> {
    use Role::*;
    let q = |q: super::Qubit| q.index();
    match g {
        Gate::Z(a) | Gate::S(a) | Gate::Sdg(a) | Gate::Rz(a, _) => vec![(q(*a), Diag)],
        Gate::X(a) => vec![(q(*a), Flip)],
        Gate::H(a) | Gate::Y(a) | Gate::Ry(a, _) => vec![(q(*a), Opaque)],
        Gate::Cx(c, t) => vec![(q(*c), Diag), (q(*t), Flip)],
        Gate::Cz(a, b) | Gate::Cp(a, b, _) => vec![(q(*a), Diag), (q(*b), Diag)],
        Gate::Swap(a, b) => vec![(q(*a), Opaque), (q(*b), Opaque)],
        Gate::Bridge(a, m, b) => vec![(q(*a), Opaque), (q(*m), Opaque), (q(*b), Opaque)],
        Gate::Measure { qubit, bit, .. } => {
            vec![(q(*qubit), Opaque), (num_qubits + bit.index(), Opaque)]
        }
        Gate::CondPauli { pauli, qubit, bits } => {
            let role = match pauli {
                Pauli::X => Flip,
                Pauli::Z => Diag,
            };
            let mut v = vec![(q(*qubit), role)];
            v.extend(bits.iter().map(|b| (num_qubits + b.index(), Read)));
            v
        }
    }
}

pub fn gates_commute(a: &Gate, b: &Gate) -> bool {
    // Bits and qubits never collide when offset by any common bound.
    const OFFSET: usize = 1 << 31;
    let ra = wire_roles(a, OFFSET);
    let rb = wire_roles(b, OFFSET);
    ra.iter().all(|(wa, roa)| {
        rb.iter()
            .filter(|(wb, _)| wb == wa)
            .all(|(_, rob)| roa == rob && *roa != Role::Opaque)
    })
}

/// Incremental frontier over a fixed circuit.
///
/// A gate is in the frontier when, on every wire it touches, all unexecuted
/// earlier gates on that wire share its (non-opaque) role.
#[derive(Debug, Clone)]
pub struct FrontierTracker {
    roles: Vec<Vec<(usize, Role)>>,
    wires: Vec<Vec<usize>>,
    heads: Vec<usize>,
    executed: Vec<bool>,
    remaining: usize,
}

impl FrontierTracker {
    pub fn new(c: &Circuit) -> Self {
        let nq = c.num_qubits();
        let mut wires = vec![Vec::new(); nq + c.num_bits()];
        let roles: Vec<_> = c.gates().map(|g| wire_roles(g, nq)).collect();
        for (i, r) in roles.iter().enumerate() {
            for &(w, _) in r {
                wires[w].push(i);
            }
        }
        FrontierTracker {
            heads: vec![0; wires.len()],
            executed: vec![false; roles.len()],
            remaining: roles.len(),
            roles,
            wires,
        }
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn is_executed(&self, g: usize) -> bool {
        self.executed[g]
    }

    fn role_on(&self, g: usize, w: usize) -> Role {
        self.roles[g]
            .iter()
            .find(|(x, _)| *x == w)
            .map(|(_, r)| *r)
            .unwrap_or(Role::Opaque)
    }

    /// Unexecuted frontier gates in program order.
    pub fn frontier(&self) -> Vec<usize> {
        let mut hits: std::collections::HashMap<usize, usize> = Default::default();
        for (w, list) in self.wires.iter().enumerate() {
            let mut it = list[self.heads[w]..]
                .iter()
                .copied()
                .filter(|&g| !self.executed[g]);
            let Some(first) = it.next() else { continue };
            *hits.entry(first).or_default() += 1;
            let role = self.role_on(first, w);
            if role == Role::Opaque {
                continue;
            }
            for g in it {
                if self.role_on(g, w) != role {
                    break;
                }
                *hits.entry(g).or_default() += 1;
            }
        }
        let mut out: Vec<usize> = hits
            .into_iter()
            .filter(|&(g, n)| n == self.roles[g].len())
            .map(|(g, _)| g)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn execute(&mut self, g: usize) {
        if std::mem::replace(&mut self.executed[g], true) {
            return;
        }
        self.remaining -= 1;
        for &(w, _) in &self.roles[g] {
            let list = &self.wires[w];
            let h = &mut self.heads[w];
            while *h < list.len() && self.executed[list[*h]] {
                *h += 1;
            }
        }
    }
}

/// Unexecuted gates that commute with every unexecuted predecessor.
pub fn commuting_frontier(c: &Circuit, executed: &[usize]) -> Vec<usize> {
    let mut t = FrontierTracker::new(c);
    for &g in executed {
        t.execute(g);
    }
    t.frontier()
}
