//! Constant-depth GHZ preparation on the highway and the cat-entangler
//! protocol that consumes it.

mod frame;
mod tree;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

pub use frame::{FrameEntry, PauliFrame};
pub use tree::{backbone_tree, ghz_prep_tree, TreeEdge};

use crate::circuit::{crz_gates, weighted_depth, Basis, Circuit, ComponentKind, Gate, Pauli, Qubit};
use crate::error::EntanglementError;
use crate::highway::HighwayLayout;
use crate::topology::{CouplingGraph, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzFragment {
    /// Acts on physical nodes; classical bits are local to the fragment.
    pub circuit: Circuit,
    pub support: Vec<NodeId>,
    pub surviving: Vec<NodeId>,
    /// Measured during preparation and reset to |0⟩ afterwards.
    pub measured: Vec<NodeId>,
    pub frame: PauliFrame,
}

impl GhzFragment {
    /// CX-depth of the unitary part before the first measurement.
    pub fn prep_depth(&self) -> f64 {
        let mut c = Circuit::new(self.circuit.num_qubits());
        c.extend(
            self.circuit
                .gates()
                .take_while(|g| !matches!(g, Gate::Measure { .. } | Gate::CondPauli { .. }))
                .cloned(),
        );
        weighted_depth(&c, 0.0)
    }
}

fn q(n: NodeId) -> Qubit {
    Qubit(n as u32)
}

/// Cluster state on a path followed by X measurements on every other node.
pub fn ghz_prep_contiguous(graph: &CouplingGraph, path: &[NodeId]) -> Result<GhzFragment, EntanglementError> {
    if path.len() < 2 {
        return Err(EntanglementError::TooShort(2));
    }
    let edges: Vec<TreeEdge> = path.windows(2).map(|w| TreeEdge::direct(w[0], w[1])).collect();
    ghz_prep_tree(graph, &edges, path[0], &[path[0], path[path.len() - 1]])
}

/// Highway segment between two critical backbone nodes; slots are bridged
/// over and keep their data.
pub fn ghz_prep_interleaved(
    graph: &CouplingGraph,
    layout: &HighwayLayout,
    segment: &[NodeId],
) -> Result<GhzFragment, EntanglementError> {
    if segment.len() < 2 {
        return Err(EntanglementError::TooShort(2));
    }
    let last = segment.len() - 1;
    for i in [0, last] {
        if !layout.is_backbone(segment[i]) {
            return Err(EntanglementError::MalformedSegment(i));
        }
    }
    let mut edges = Vec::new();
    let mut i = 0;
    while i < last {
        if layout.is_backbone(segment[i + 1]) {
            edges.push(TreeEdge::direct(segment[i], segment[i + 1]));
            i += 1;
        } else if i + 2 <= last && layout.is_backbone(segment[i + 2]) {
            edges.push(TreeEdge {
                a: segment[i],
                b: segment[i + 2],
                via: Some(segment[i + 1]),
            });
            i += 2;
        } else {
            return Err(EntanglementError::MalformedSegment(i + 2));
        }
    }
    ghz_prep_tree(graph, &edges, segment[0], &[segment[0], segment[last]])
}

/// Joins `fresh` to the GHZ state on `existing` through a |0⟩ helper that
/// both sides CX into and that is then measured in Z. A single fresh node is
/// prepared in |+⟩; several are taken to already hold a GHZ state, which
/// merges the two.
pub fn extend_ghz(
    graph: &CouplingGraph,
    existing: &[NodeId],
    helper: NodeId,
    fresh: &[NodeId],
) -> Result<GhzFragment, EntanglementError> {
    if existing.is_empty() || fresh.is_empty() {
        return Err(EntanglementError::TooShort(1));
    }
    let member = existing
        .iter()
        .copied()
        .find(|&e| graph.are_adjacent(e, helper))
        .ok_or(EntanglementError::NotAdjacent(existing[0], helper))?;
    let anchor = fresh
        .iter()
        .copied()
        .find(|&f| graph.are_adjacent(f, helper))
        .ok_or(EntanglementError::NotAdjacent(fresh[0], helper))?;

    let mut effective = Vec::new();
    for group in [existing, fresh] {
        effective.push(Gate::H(q(group[0])));
        effective.extend(group[1..].iter().map(|&n| Gate::Cx(q(group[0]), q(n))));
    }
    let mut circuit = Circuit::new(graph.num_nodes());
    if fresh.len() > 1 {
        // The fresh side's state is an input here, not part of the fragment.
    } else {
        circuit.push(Gate::H(q(anchor)));
    }
    let link = [Gate::Cx(q(member), q(helper)), Gate::Cx(q(anchor), q(helper))];
    circuit.extend(link.clone());
    effective.extend(link);
    let bit = circuit.alloc_bit();
    circuit.push(Gate::Measure { qubit: q(helper), basis: Basis::Z, bit });

    let mut surviving: Vec<NodeId> = existing.iter().chain(fresh).copied().collect();
    surviving.sort_unstable();
    let mut support = surviving.clone();
    support.push(helper);
    support.sort_unstable();
    let frame = frame::derive_frame(&support, &effective, &[(helper, Basis::Z, bit)], &surviving)?;
    circuit.extend(frame.gates());
    circuit.push(Gate::CondPauli { pauli: Pauli::X, qubit: q(helper), bits: vec![bit] });
    Ok(GhzFragment {
        circuit,
        support,
        surviving,
        measured: vec![helper],
        frame,
    })
}

/// Re-joins reset (|0⟩) highway nodes to a GHZ state. Each node takes a CX
/// (or a bridge over one slot) from the nearest surviving node; ties go to
/// the least-loaded source, then the lowest id.
pub fn reentangle_entrances(
    graph: &CouplingGraph,
    layout: &HighwayLayout,
    surviving: &[NodeId],
    needed: &[NodeId],
    load: &BTreeMap<NodeId, usize>,
) -> Result<GhzFragment, EntanglementError> {
    let alive: BTreeSet<NodeId> = surviving.iter().copied().collect();
    let mut load = load.clone();
    let mut circuit = Circuit::new(graph.num_nodes());
    let mut support: BTreeSet<NodeId> = alive.clone();
    for &n in needed {
        // Nearest survivors along the highway, recording one path to each.
        let mut prev = BTreeMap::from([(n, n)]);
        let mut frontier = VecDeque::from([n]);
        let mut found: Vec<NodeId> = Vec::new();
        while found.is_empty() && !frontier.is_empty() {
            let mut next = VecDeque::new();
            for u in frontier {
                for &v in layout.highway_neighbors(u) {
                    if prev.contains_key(&v) {
                        continue;
                    }
                    prev.insert(v, u);
                    if alive.contains(&v) {
                        found.push(v);
                    } else {
                        next.push_back(v);
                    }
                }
            }
            frontier = next;
        }
        let src = found
            .into_iter()
            .min_by_key(|s| (load.get(s).copied().unwrap_or(0), *s))
            .ok_or_else(|| EntanglementError::DisconnectedEntrances(vec![n]))?;
        if graph.are_adjacent(src, n) {
            circuit.push(Gate::Cx(q(src), q(n)));
        } else {
            let mid = prev[&src];
            if prev[&mid] != n || !graph.are_adjacent(src, mid) || !graph.are_adjacent(mid, n) {
                return Err(EntanglementError::NotAdjacent(src, n));
            }
            circuit.push(Gate::Bridge(q(src), q(mid), q(n)));
        }
        *load.entry(src).or_default() += 1;
        support.insert(n);
    }
    let support: Vec<NodeId> = support.into_iter().collect();
    Ok(GhzFragment {
        circuit,
        surviving: support.clone(),
        support,
        measured: Vec::new(),
        frame: PauliFrame::default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatComponent {
    pub target: NodeId,
    pub entrance: NodeId,
    pub kind: ComponentKind,
}

/// Multi-target controlled gate through a GHZ state on `ghz`: entangle the
/// control in, fan out from the entrances, then disentangle. Every GHZ node
/// ends in |0⟩.
pub fn cat_protocol(
    graph: &CouplingGraph,
    ghz: &[NodeId],
    control: NodeId,
    control_entrance: NodeId,
    components: &[CatComponent],
) -> Result<Circuit, EntanglementError> {
    let nodes: BTreeSet<NodeId> = ghz.iter().copied().collect();
    let mut missing: Vec<NodeId> = std::iter::once(control_entrance)
        .chain(components.iter().map(|c| c.entrance))
        .filter(|e| !nodes.contains(e))
        .collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(EntanglementError::DisconnectedEntrances(missing));
    }
    if !graph.are_adjacent(control, control_entrance) {
        return Err(EntanglementError::NotAdjacent(control, control_entrance));
    }
    for c in components {
        if c.entrance == control_entrance {
            return Err(EntanglementError::EntranceReuse(control_entrance));
        }
        if !graph.are_adjacent(c.target, c.entrance) {
            return Err(EntanglementError::NotAdjacent(c.target, c.entrance));
        }
    }
    let others: Vec<NodeId> = nodes.iter().copied().filter(|&n| n != control_entrance).collect();
    let mut c = Circuit::new(graph.num_nodes());
    cat_entangle(&mut c, control, control_entrance, &others);
    for comp in components {
        cat_fanout(&mut c, comp);
    }
    cat_disentangle(&mut c, control, &others);
    Ok(c)
}

/// Copies the control into the GHZ state: CX onto its entrance, Z-measure
/// the entrance, fix the rest of the GHZ and reset the entrance.
pub fn cat_entangle(c: &mut Circuit, control: NodeId, control_entrance: NodeId, others: &[NodeId]) {
    c.push(Gate::Cx(q(control), q(control_entrance)));
    let m = c.alloc_bit();
    c.push(Gate::Measure { qubit: q(control_entrance), basis: Basis::Z, bit: m });
    for &v in others {
        c.push(Gate::CondPauli { pauli: Pauli::X, qubit: q(v), bits: vec![m] });
    }
    c.push(Gate::CondPauli { pauli: Pauli::X, qubit: q(control_entrance), bits: vec![m] });
}

/// One controlled component from an entrance holding a copy of the control.
pub fn cat_fanout(c: &mut Circuit, comp: &CatComponent) {
    match comp.kind {
        ComponentKind::Cx => c.push(Gate::Cx(q(comp.entrance), q(comp.target))),
        ComponentKind::Crz(t) => c.extend(crz_gates(q(comp.entrance), q(comp.target), t)),
    }
}

/// X-measures the remaining GHZ nodes, fixes the control's phase by their
/// parity and resets them to |0⟩.
pub fn cat_disentangle(c: &mut Circuit, control: NodeId, others: &[NodeId]) {
    let bits: Vec<_> = others
        .iter()
        .map(|&v| {
            let b = c.alloc_bit();
            c.push(Gate::Measure { qubit: q(v), basis: Basis::X, bit: b });
            b
        })
        .collect();
    if !bits.is_empty() {
        c.push(Gate::CondPauli { pauli: Pauli::Z, qubit: q(control), bits: bits.clone() });
    }
    for (&v, &b) in others.iter().zip(&bits) {
        c.push(Gate::CondPauli { pauli: Pauli::Z, qubit: q(v), bits: vec![b] });
        c.push(Gate::H(q(v)));
    }
}
