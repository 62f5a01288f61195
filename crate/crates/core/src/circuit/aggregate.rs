//! Grouping frontier CX gates into multi-target controlled gates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ComponentKind {
    Cx,
    /// Controlled RZ(angle).
    Crz(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub target: Qubit,
    pub kind: ComponentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTargetGate {
    pub control: Qubit,
    pub components: Vec<Component>,
    /// Realized as H on every operand, the group, then H again. Set when the
    /// source gates shared a target that became the control.
    pub conjugated: bool,
    /// Source gate indices, aligned with `components`.
    pub sources: Vec<usize>,
}

impl MultiTargetGate {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        std::iter::once(self.control).chain(self.components.iter().map(|c| c.target))
    }

    /// The equivalent gate sequence, in source order.
    pub fn unpack(&self) -> Vec<Gate> {
        let mut out = Vec::new();
        if self.conjugated {
            out.extend(self.qubits().map(Gate::H));
        }
        for c in &self.components {
            match c.kind {
                ComponentKind::Cx => out.push(Gate::Cx(self.control, c.target)),
                ComponentKind::Crz(t) => out.extend(crz_gates(self.control, c.target, t)),
            }
        }
        if self.conjugated {
            out.extend(self.qubits().map(Gate::H));
        }
        out
    }
}

/// Controlled RZ(θ) as RZ(t, θ/2) CX RZ(t, −θ/2) CX.
pub fn crz_gates(control: Qubit, target: Qubit, theta: f64) -> Vec<Gate> {
    vec![
        Gate::Rz(target, theta / 2.0),
        Gate::Cx(control, target),
        Gate::Rz(target, -theta / 2.0),
        Gate::Cx(control, target),
    ]
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregation {
    /// Sorted by descending component count, then by first source index.
    pub groups: Vec<MultiTargetGate>,
    /// Frontier gates that are not CX.
    pub residual: Vec<usize>,
}

/// Partitions the frontier's CX gates into shared-control groups.
///
/// Gates sharing a target are regrouped around that target (H-conjugated)
/// only when that group is strictly larger than the best shared-control one.
pub fn aggregate_frontier(c: &Circuit, frontier: &[usize]) -> Aggregation {
    let mut cx = Vec::new();
    let mut residual = Vec::new();
    for &i in frontier {
        match *c.gate(i) {
            Gate::Cx(a, b) => cx.push((i, a, b)),
            _ => residual.push(i),
        }
    }
    let mut alive = vec![true; cx.len()];
    let mut groups = Vec::new();
    loop {
        let mut by_control: BTreeMap<Qubit, Vec<usize>> = BTreeMap::new();
        let mut by_target: BTreeMap<Qubit, Vec<usize>> = BTreeMap::new();
        for (k, &(_, a, b)) in cx.iter().enumerate() {
            if alive[k] {
                by_control.entry(a).or_default().push(k);
                by_target.entry(b).or_default().push(k);
            }
        }
        let best = |m: &BTreeMap<Qubit, Vec<usize>>| {
            m.iter()
                .max_by(|x, y| x.1.len().cmp(&y.1.len()).then(y.0.cmp(x.0)))
                .map(|(q, v)| (*q, v.clone()))
        };
        let Some((ctrl, members)) = best(&by_control) else {
            break;
        };
        let (conjugated, hub, members) = match best(&by_target) {
            Some((t, tm)) if tm.len() > members.len() => (true, t, tm),
            _ => (false, ctrl, members),
        };
        let mut g = MultiTargetGate {
            control: hub,
            components: Vec::with_capacity(members.len()),
            conjugated,
            sources: Vec::with_capacity(members.len()),
        };
        for k in members {
            alive[k] = false;
            let (src, a, b) = cx[k];
            g.components.push(Component {
                target: if conjugated { a } else { b },
                kind: ComponentKind::Cx,
            });
            g.sources.push(src);
        }
        groups.push(g);
    }
    groups.sort_by(|x, y| {
        y.len()
            .cmp(&x.len())
            .then(x.sources[0].cmp(&y.sources[0]))
    });
    Aggregation { groups, residual }
}
