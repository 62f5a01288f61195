//! GHZ preparation on a tree of backbone nodes.
//!
//! Every tree edge is either a direct coupling or a bridge over an
//! interleave slot. Required nodes (the root, leaves, branch points and any
//! caller-listed entrance) survive; the free nodes between two required
//! nodes alternate measured/surviving. When a chain has an even number of
//! free nodes one survivor-survivor edge is realized as a copy CX into a
//! fresh |0⟩ child instead of a cluster bond.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::frame::derive_frame;
use super::GhzFragment;
use crate::circuit::{Basis, Circuit, Gate, Pauli, Qubit};
use crate::error::EntanglementError;
use crate::highway::HighwayLayout;
use crate::topology::{CouplingGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeEdge {
    pub a: NodeId,
    pub b: NodeId,
    /// Interleave slot bridged over, if the edge is not a direct coupling.
    pub via: Option<NodeId>,
}

impl TreeEdge {
    pub fn direct(a: NodeId, b: NodeId) -> Self {
        TreeEdge { a, b, via: None }
    }

    fn other(&self, n: NodeId) -> NodeId {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Macro {
    Cz(NodeId, NodeId),
    BridgeCz(NodeId, NodeId, NodeId),
    Copy(NodeId, NodeId),
    BridgeCopy(NodeId, NodeId, NodeId),
}

fn q(n: NodeId) -> Qubit {
    Qubit(n as u32)
}

impl Macro {
    /// Sub-gates at relative time steps; `flip` swaps the bridge ends.
    fn expand(self, flip: bool) -> Vec<(usize, Gate)> {
        match self {
            Macro::Cz(u, v) => vec![(0, Gate::Cz(q(u), q(v)))],
            Macro::BridgeCz(a, s, b) => {
                let (u, v) = if flip { (b, a) } else { (a, b) };
                vec![
                    (0, Gate::Cx(q(u), q(s))),
                    (1, Gate::Cz(q(s), q(v))),
                    (2, Gate::Cx(q(u), q(s))),
                    (3, Gate::Cz(q(s), q(v))),
                ]
            }
            Macro::Copy(p, c) => vec![
                (0, Gate::H(q(c))),
                (0, Gate::Cz(q(p), q(c))),
                (0, Gate::H(q(c))),
            ],
            Macro::BridgeCopy(p, s, c) => vec![
                (0, Gate::Cx(q(p), q(s))),
                (1, Gate::Cx(q(s), q(c))),
                (2, Gate::Cx(q(p), q(s))),
                (3, Gate::Cx(q(s), q(c))),
            ],
        }
    }

    fn effective(self) -> Gate {
        match self {
            Macro::Cz(u, v) | Macro::BridgeCz(u, _, v) => Gate::Cz(q(u), q(v)),
            Macro::Copy(p, c) | Macro::BridgeCopy(p, _, c) => Gate::Cx(q(p), q(c)),
        }
    }

    fn is_bridge_cz(self) -> bool {
        matches!(self, Macro::BridgeCz(..))
    }

    fn copy_child(self) -> Option<NodeId> {
        match self {
            Macro::Copy(_, c) | Macro::BridgeCopy(_, _, c) => Some(c),
            _ => None,
        }
    }
}

fn check_adjacent(graph: &CouplingGraph, a: NodeId, b: NodeId) -> Result<(), EntanglementError> {
    if graph.are_adjacent(a, b) {
        Ok(())
    } else {
        Err(EntanglementError::NotAdjacent(a, b))
    }
}

/// Prepares a GHZ state on the surviving nodes of a backbone tree.
pub fn ghz_prep_tree(
    graph: &CouplingGraph,
    edges: &[TreeEdge],
    root: NodeId,
    required: &[NodeId],
) -> Result<GhzFragment, EntanglementError> {
    let mut adj: BTreeMap<NodeId, Vec<usize>> = BTreeMap::from([(root, Vec::new())]);
    let mut slots = HashSet::new();
    for (i, e) in edges.iter().enumerate() {
        match e.via {
            None => check_adjacent(graph, e.a, e.b)?,
            Some(s) => {
                check_adjacent(graph, e.a, s)?;
                check_adjacent(graph, s, e.b)?;
                if !slots.insert(s) {
                    return Err(EntanglementError::NotATree);
                }
            }
        }
        adj.entry(e.a).or_default().push(i);
        adj.entry(e.b).or_default().push(i);
    }
    if slots.iter().any(|s| adj.contains_key(s)) || edges.len() + 1 != adj.len() {
        return Err(EntanglementError::NotATree);
    }

    // Root the tree.
    let mut parent_edge: BTreeMap<NodeId, Option<usize>> = BTreeMap::from([(root, None)]);
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &ei in &adj[&u] {
            let v = edges[ei].other(u);
            if !parent_edge.contains_key(&v) {
                parent_edge.insert(v, Some(ei));
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    if order.len() != adj.len() {
        return Err(EntanglementError::NotATree);
    }
    let children = |u: NodeId| -> Vec<(usize, NodeId)> {
        adj[&u]
            .iter()
            .filter(|&&ei| parent_edge[&u] != Some(ei))
            .map(|&ei| (ei, edges[ei].other(u)))
            .collect()
    };

    let missing: Vec<_> = required.iter().copied().filter(|r| !adj.contains_key(r)).collect();
    if !missing.is_empty() {
        return Err(EntanglementError::DisconnectedEntrances(missing));
    }
    let mut req: BTreeSet<NodeId> = required.iter().copied().collect();
    req.insert(root);
    req.extend(adj.iter().filter(|(_, es)| es.len() != 2).map(|(&n, _)| n));

    // Two copy placements: spread copies through the chain, or push them
    // onto leaves. Neither dominates, so keep the shallower preparation.
    let build = |leaf_copies: bool| -> Result<GhzFragment, EntanglementError> {
        let mut measured = BTreeSet::new();
        let mut copies = Vec::new();
        let mut copy_children = BTreeSet::new();
        let mut bonds = Vec::new();
        let mut stack = vec![root];
        while let Some(r) = stack.pop() {
            for (first_edge, first) in children(r) {
                let mut nodes = vec![r, first];
                let mut chain_edges = vec![first_edge];
                let mut cur = first;
                while !req.contains(&cur) {
                    let (ei, next) = children(cur)[0];
                    nodes.push(next);
                    chain_edges.push(ei);
                    cur = next;
                }
                stack.push(cur);
                let j = nodes.len() - 2;
                // A copy whose child has further bonds, or whose parent is itself
                // a copy child, delays the bonds that depend on it.
                let end_branches = !children(cur).is_empty();
                let copy_at = (j % 2 == 0).then(|| {
                    (0..=j / 2)
                        .map(|h| 2 * h)
                        .min_by_key(|&i| {
                            let stalls =
                                usize::from(if leaf_copies { i < j || end_branches } else { i == j }) + usize::from(i == 0 && copy_children.contains(&r));
                            (stalls, edges[chain_edges[i]].via.is_some(), i.abs_diff(j / 2))
                        })
                        .unwrap_or(j)
                });
                for (m, &n) in nodes.iter().enumerate().skip(1).take(j) {
                    let gone = match copy_at {
                        None => m % 2 == 1,
                        Some(i) if m <= i => m % 2 == 1,
                        Some(i) => (m - i - 1) % 2 == 1,
                    };
                    if gone {
                        measured.insert(n);
                    }
                }
                for (i, &ei) in chain_edges.iter().enumerate() {
                    let (p, c) = (nodes[i], nodes[i + 1]);
                    let e = edges[ei];
                    if copy_at == Some(i) {
                        copy_children.insert(c);
                        copies.push(match e.via {
                            None => Macro::Copy(p, c),
                            Some(s) => Macro::BridgeCopy(p, s, c),
                        });
                    } else {
                        bonds.push(match e.via {
                            None => Macro::Cz(p, c),
                            Some(s) => Macro::BridgeCz(p, s, c),
                        });
                    }
                }
            }
        }
        // Copies run parent before child.
        let depth_of: BTreeMap<NodeId, usize> = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        copies.sort_by_key(|m| depth_of[&m.copy_child().unwrap()]);

        let mut busy: HashSet<(NodeId, usize)> = HashSet::new();
        let mut ready: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut placed: Vec<(usize, usize, Macro, Vec<(usize, Gate)>)> = Vec::new();
        for (k, &m) in copies.iter().chain(&bonds).enumerate() {
            let flips: &[bool] = if m.is_bridge_cz() { &[false, true] } else { &[false] };
            let mut best: Option<(usize, Vec<(usize, Gate)>)> = None;
            for &flip in flips {
                let subs = m.expand(flip);
                let uses: Vec<(NodeId, usize)> = subs
                    .iter()
                    .flat_map(|(st, g)| g.qubits().into_iter().map(move |x| (x.index(), *st)))
                    .collect();
                let mut t = 0;
                while !uses
                    .iter()
                    .all(|&(n, st)| !busy.contains(&(n, t + st)) && t + st >= ready.get(&n).copied().unwrap_or(0))
                {
                    t += 1;
                }
                if best.as_ref().is_none_or(|(bt, _)| t < *bt) {
                    best = Some((t, subs));
                }
            }
            let (t, subs) = best.unwrap();
            for (st, g) in &subs {
                for x in g.qubits() {
                    busy.insert((x.index(), t + st));
                }
            }
            if let Some(c) = m.copy_child() {
                let end = t + subs.iter().map(|(st, _)| st).max().unwrap() + 1;
                ready.insert(c, end);
            }
            placed.push((t, k, m, subs));
        }
        placed.sort_by_key(|&(t, k, ..)| (t, k));

        let support: Vec<NodeId> = adj.keys().copied().collect();
        let children_of_copies: BTreeSet<NodeId> = copies.iter().filter_map(|m| m.copy_child()).collect();
        let surviving: Vec<NodeId> = support.iter().copied().filter(|n| !measured.contains(n)).collect();

        let mut circuit = Circuit::new(graph.num_nodes());
        let mut effective = Vec::new();
        for &n in &support {
            if !children_of_copies.contains(&n) {
                circuit.push(Gate::H(q(n)));
                effective.push(Gate::H(q(n)));
            }
        }
        let mut timed: Vec<(usize, usize, usize, Gate)> = Vec::new();
        for (t, k, m, subs) in &placed {
            effective.push(m.effective());
            for (i, (st, g)) in subs.iter().enumerate() {
                timed.push((t + st, *k, i, g.clone()));
            }
        }
        timed.sort_by_key(|&(t, k, i, _)| (t, k, i));
        circuit.extend(timed.into_iter().map(|(.., g)| g));

        let mut meas = Vec::new();
        for &n in &measured {
            let bit = circuit.alloc_bit();
            circuit.push(Gate::Measure { qubit: q(n), basis: Basis::X, bit });
            meas.push((n, Basis::X, bit));
        }
        let frame = derive_frame(&support, &effective, &meas, &surviving)?;
        circuit.extend(frame.gates());
        for &(n, _, bit) in &meas {
            circuit.push(Gate::CondPauli { pauli: Pauli::Z, qubit: q(n), bits: vec![bit] });
            circuit.push(Gate::H(q(n)));
        }
        Ok(GhzFragment {
            circuit,
            support,
            surviving,
            measured: measured.into_iter().collect(),
            frame,
        })

    };
    let spread = build(false)?;
    let leaves = build(true)?;
    Ok(if leaves.prep_depth() < spread.prep_depth() { leaves } else { spread })
}

/// Turns highway edges (backbone and slot nodes) into backbone tree edges,
/// merging each interior slot into a bridge and dropping slot leaves.
pub fn backbone_tree(
    layout: &HighwayLayout,
    highway_edges: &[(NodeId, NodeId)],
) -> Result<Vec<TreeEdge>, EntanglementError> {
    let mut at_slot: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut out = Vec::new();
    for &(a, b) in highway_edges {
        match (layout.is_backbone(a), layout.is_backbone(b)) {
            (true, true) => out.push(TreeEdge::direct(a.min(b), a.max(b))),
            (true, false) => at_slot.entry(b).or_default().push(a),
            (false, true) => at_slot.entry(a).or_default().push(b),
            (false, false) => return Err(EntanglementError::MalformedSegment(a)),
        }
    }
    for (s, ends) in at_slot {
        match ends[..] {
            [_] => {}
            [a, b] => out.push(TreeEdge {
                a: a.min(b),
                b: a.max(b),
                via: Some(s),
            }),
            _ => return Err(EntanglementError::NotATree),
        }
    }
    Ok(out)
}
