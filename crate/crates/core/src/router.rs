//! SWAP routing of data qubits: moves to highway entrances and execution of
//! off-highway two-qubit gates.
//!
//! Routes run over data nodes. Between shuttles the highway holds only |0⟩,
//! so a route may also cross a run of one or two idle backbone nodes: the
//! state is swapped through the run and the ancillas are swapped back.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, Qubit};
use crate::error::CompileError;
use crate::highway::HighwayLayout;
use crate::topology::{CouplingGraph, EdgeKind, NodeId};

fn q(n: NodeId) -> Qubit {
    Qubit(n as u32)
}

/// Logical data qubit ↔ physical node bijection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingState {
    l2p: Vec<NodeId>,
    p2l: Vec<Option<usize>>,
}

impl MappingState {
    pub fn new(l2p: Vec<NodeId>, num_nodes: usize) -> Self {
        let mut p2l = vec![None; num_nodes];
        for (l, &p) in l2p.iter().enumerate() {
            assert!(p2l[p].replace(l).is_none(), "node {p} mapped twice");
        }
        MappingState { l2p, p2l }
    }

    /// Logical qubit i on the i-th data node in id order.
    pub fn trivial(layout: &HighwayLayout, num_logical: usize) -> Result<Self, CompileError> {
        let data: Vec<NodeId> = layout.data_nodes().take(num_logical).collect();
        if data.len() < num_logical {
            return Err(CompileError::CapacityExceeded {
                needed: num_logical,
                available: layout.num_data(),
            });
        }
        Ok(Self::new(data, layout.roles().len()))
    }

    pub fn phys(&self, l: usize) -> NodeId {
        self.l2p[l]
    }

    pub fn logical(&self, p: NodeId) -> Option<usize> {
        self.p2l[p]
    }

    pub fn l2p(&self) -> &[NodeId] {
        &self.l2p
    }

    pub fn swap(&mut self, a: NodeId, b: NodeId) {
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l[a] = lb;
        self.p2l[b] = la;
        if let Some(l) = la {
            self.l2p[l] = b;
        }
        if let Some(l) = lb {
            self.l2p[l] = a;
        }
    }
}

/// One step of a route: a plain edge (`via` empty) or a crossing over idle
/// backbone nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hop {
    pub to: NodeId,
    pub via: Vec<NodeId>,
}

impl Hop {
    /// Number of SWAPs.
    pub fn cost(&self) -> usize {
        2 * self.via.len() + 1
    }
}

#[derive(Debug, Clone)]
pub struct Router<'a> {
    graph: &'a CouplingGraph,
    layout: &'a HighwayLayout,
    crossings: Vec<Vec<Hop>>,
    cross_chip_cost: usize,
}

impl<'a> Router<'a> {
    pub fn new(graph: &'a CouplingGraph, layout: &'a HighwayLayout) -> Self {
        let n = graph.num_nodes();
        let mut crossings = vec![Vec::new(); n];
        for a in layout.data_nodes() {
            let mut found: Vec<Hop> = Vec::new();
            let mut add = |hop: Hop| {
                if hop.to != a && !graph.are_adjacent(a, hop.to) {
                    match found.iter_mut().find(|h| h.to == hop.to) {
                        Some(h) if h.cost() <= hop.cost() => {}
                        Some(h) => *h = hop,
                        None => found.push(hop),
                    }
                }
            };
            for h1 in graph.neighbors(a).filter(|&h| layout.is_backbone(h)) {
                for b in graph.neighbors(h1).filter(|&b| layout.is_data(b)) {
                    add(Hop { to: b, via: vec![h1] });
                }
                for h2 in graph.neighbors(h1).filter(|&h| layout.is_backbone(h)) {
                    for b in graph.neighbors(h2).filter(|&b| layout.is_data(b)) {
                        if !graph.are_adjacent(h1, b) {
                            add(Hop { to: b, via: vec![h1, h2] });
                        }
                    }
                }
            }
            found.sort_by_key(|h| (h.to, h.via.clone()));
            crossings[a] = found;
        }
        Router {
            graph,
            layout,
            crossings,
            cross_chip_cost: 1,
        }
    }

    /// Weight of a SWAP over a cross-chip link relative to an on-chip one.
    pub fn with_cross_chip_cost(mut self, cost: usize) -> Self {
        self.cross_chip_cost = cost.max(1);
        self
    }

    fn swap_cost(&self, a: NodeId, b: NodeId) -> usize {
        match self.graph.edge_kind(a, b) {
            Some(EdgeKind::CrossChip) => self.cross_chip_cost,
            _ => 1,
        }
    }

    /// Weighted SWAP count of `hop` taken from `from`.
    pub fn hop_cost(&self, from: NodeId, hop: &Hop) -> usize {
        let mut chain = vec![from];
        chain.extend(&hop.via);
        chain.push(hop.to);
        let forward: usize = chain.windows(2).map(|w| self.swap_cost(w[0], w[1])).sum();
        let back: usize = chain[..chain.len() - 1].windows(2).map(|w| self.swap_cost(w[0], w[1])).sum();
        forward + back
    }

    pub fn graph(&self) -> &CouplingGraph {
        self.graph
    }

    /// Cheapest route from `from` to the first node satisfying `goal`, through
    /// data nodes accepted by `passable`. Costs are weighted SWAP counts; ties
    /// resolve to the lowest node id.
    pub fn path(
        &self,
        from: NodeId,
        goal: impl Fn(NodeId) -> bool,
        crossings: bool,
        passable: impl Fn(NodeId) -> bool,
    ) -> Option<Vec<Hop>> {
        let n = self.graph.num_nodes();
        let mut dist = vec![usize::MAX; n];
        let mut prev: Vec<Option<(NodeId, Hop)>> = vec![None; n];
        let mut heap = BinaryHeap::from([Reverse((0usize, from))]);
        dist[from] = 0;
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if u != from && goal(u) {
                let mut hops = Vec::new();
                let mut cur = u;
                while let Some((p, hop)) = prev[cur].clone() {
                    hops.push(hop);
                    cur = p;
                }
                hops.reverse();
                return Some(hops);
            }
            let plain = self
                .graph
                .neighbors(u)
                .filter(|&v| self.layout.is_data(v))
                .map(|v| Hop { to: v, via: Vec::new() });
            let crossing = crossings
                .then(|| self.crossings[u].iter().cloned())
                .into_iter()
                .flatten();
            for hop in plain.chain(crossing) {
                let v = hop.to;
                if !passable(v) {
                    continue;
                }
                let nd = d + self.hop_cost(u, &hop);
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = Some((u, hop));
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        None
    }

    /// Emits the SWAPs for one hop and updates the mapping.
    pub fn apply_hop(&self, from: NodeId, hop: &Hop, mapping: &mut MappingState, out: &mut Vec<Gate>) {
        let chain: Vec<NodeId> = std::iter::once(from)
            .chain(hop.via.iter().copied())
            .chain(std::iter::once(hop.to))
            .collect();
        for w in chain.windows(2) {
            out.push(Gate::Swap(q(w[0]), q(w[1])));
        }
        for w in chain[..chain.len() - 1].windows(2).rev() {
            out.push(Gate::Swap(q(w[0]), q(w[1])));
        }
        mapping.swap(from, hop.to);
    }

    /// SWAPs logical `l` through data nodes (avoiding `locked`) until it sits
    /// next to `entrance`. Returns the number of SWAPs.
    pub fn route_to_entrance(
        &self,
        l: usize,
        entrance: NodeId,
        mapping: &mut MappingState,
        locked: &BTreeSet<NodeId>,
        out: &mut Vec<Gate>,
    ) -> Result<usize, CompileError> {
        let p = mapping.phys(l);
        if self.graph.are_adjacent(p, entrance) {
            return Ok(0);
        }
        let hops = self
            .path(
                p,
                |v| self.graph.are_adjacent(v, entrance),
                false,
                |v| !locked.contains(&v),
            )
            .ok_or(CompileError::NoRoute(p, entrance))?;
        let mut cur = p;
        for hop in &hops {
            self.apply_hop(cur, hop, mapping, out);
            cur = hop.to;
        }
        Ok(hops.len())
    }

    fn try_direct(&self, c: NodeId, t: NodeId, out: &mut Vec<Gate>) -> bool {
        if self.graph.are_adjacent(c, t) {
            out.push(Gate::Cx(q(c), q(t)));
            return true;
        }
        let mid = self
            .graph
            .neighbors(c)
            .filter(|&m| self.graph.are_adjacent(m, t))
            .min();
        if let Some(m) = mid {
            out.push(Gate::Bridge(q(c), q(m), q(t)));
            return true;
        }
        false
    }

    /// CX between logical `c` and `t`: direct, as a BRIDGE over a common
    /// neighbour, or after moving both ends toward each other.
    pub fn route_offhighway_gate(
        &self,
        c: usize,
        t: usize,
        mapping: &mut MappingState,
        out: &mut Vec<Gate>,
    ) -> Result<(), CompileError> {
        let (pc, pt) = (mapping.phys(c), mapping.phys(t));
        if self.try_direct(pc, pt, out) {
            return Ok(());
        }
        let hops = self
            .path(pc, |v| v == pt, true, |_| true)
            .ok_or(CompileError::NoRoute(pc, pt))?;
        let mut nodes = vec![pc];
        nodes.extend(hops.iter().map(|h| h.to));
        let (mut i, mut j) = (0, nodes.len() - 1);
        let mut move_c = true;
        while j - i > 1 {
            if move_c {
                self.apply_hop(nodes[i], &hops[i], mapping, out);
                i += 1;
            } else {
                let back = Hop {
                    to: nodes[j - 1],
                    via: hops[j - 1].via.iter().rev().copied().collect(),
                };
                self.apply_hop(nodes[j], &back, mapping, out);
                j -= 1;
            }
            move_c = !move_c;
            if self.try_direct(mapping.phys(c), mapping.phys(t), out) {
                return Ok(());
            }
        }
        // Remaining gap is a crossing with no shared neighbour: borrow the
        // first idle ancilla of the run.
        let (a, b) = (nodes[i], nodes[j]);
        let h = hops[i].via[0];
        out.push(Gate::Swap(q(a), q(h)));
        let (pc, pt) = if mapping.phys(c) == a { (h, b) } else { (b, h) };
        if !self.try_direct(pc, pt, out) {
            return Err(CompileError::NoRoute(pc, pt));
        }
        out.push(Gate::Swap(q(a), q(h)));
        Ok(())
    }
}

/// The same pipeline with no highway: every gate is routed with SWAPs and
/// BRIDGEs over the full graph.
pub fn baseline_compile(
    c: &crate::circuit::Circuit,
    graph: &CouplingGraph,
    cfg: &crate::scheduler::SchedulerConfig,
) -> Result<crate::scheduler::CompiledProgram, CompileError> {
    crate::scheduler::compile(c, graph, &HighwayLayout::empty(graph), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highway::{allocate_highway, HighwayConfig};
    use crate::sim::{statevector_run, Outcomes, StateVector};
    use crate::topology::{build_chiplet_array, ChipletSpec};

    fn line(n: usize) -> CouplingGraph {
        build_chiplet_array(&ChipletSpec {
            chiplet_rows: 1,
            chiplet_cols: n,
            ..ChipletSpec::square(1, 1, 1)
        })
        .unwrap()
    }

    fn run(router: &Router, c: usize, t: usize, mapping: &mut MappingState) -> Vec<Gate> {
        let mut out = Vec::new();
        router.route_offhighway_gate(c, t, mapping, &mut out).unwrap();
        out
    }

    #[test]
    fn adjacent_gate_is_emitted_directly() {
        let g = line(4);
        let layout = HighwayLayout::empty(&g);
        let r = Router::new(&g, &layout);
        let mut m = MappingState::trivial(&layout, 4).unwrap();
        assert_eq!(run(&r, 1, 2, &mut m), vec![Gate::Cx(Qubit(1), Qubit(2))]);
    }

    #[test]
    fn distance_two_uses_bridge() {
        let g = line(4);
        let layout = HighwayLayout::empty(&g);
        let r = Router::new(&g, &layout);
        let mut m = MappingState::trivial(&layout, 4).unwrap();
        let before = m.clone();
        assert_eq!(run(&r, 0, 2, &mut m), vec![Gate::Bridge(Qubit(0), Qubit(1), Qubit(2))]);
        assert_eq!(m, before);
    }

    #[test]
    fn distance_d_uses_at_most_d_minus_two_swaps() {
        for n in 4..12 {
            let g = line(n);
            let layout = HighwayLayout::empty(&g);
            let r = Router::new(&g, &layout);
            let mut m = MappingState::trivial(&layout, n).unwrap();
            let gates = run(&r, 0, n - 1, &mut m);
            let swaps = gates.iter().filter(|g| matches!(g, Gate::Swap(..))).count();
            assert!(swaps <= n - 3, "n={n}: {swaps} swaps");
            assert!(gates.iter().all(|g| g
                .qubits()
                .windows(2)
                .all(|w| g.qubits().len() == 3 || r.graph().are_adjacent(w[0].index(), w[1].index()))));
        }
    }

    #[test]
    fn crossing_restores_ancillas_and_moves_data() {
        let g = line(3);
        let layout = HighwayLayout::empty(&g).with_backbone(&[1]);
        let r = Router::new(&g, &layout);
        let mut m = MappingState::new(vec![0, 2], 3);
        let hops = r.path(0, |v| v == 2, true, |_| true).unwrap();
        assert_eq!(hops, vec![Hop { to: 2, via: vec![1] }]);
        let mut out = Vec::new();
        r.apply_hop(0, &hops[0], &mut m, &mut out);
        assert_eq!(out.len(), 3);
        assert_eq!(m.l2p(), &[2, 0]);
        let mut c = crate::circuit::Circuit::new(3);
        c.push(Gate::X(Qubit(0)));
        c.extend(out);
        let (sv, _) = statevector_run(&c, StateVector::zero(3).unwrap(), &mut Outcomes::seeded(0)).unwrap();
        let mut expect = crate::circuit::Circuit::new(3);
        expect.push(Gate::X(Qubit(2)));
        let (ev, _) = statevector_run(&expect, StateVector::zero(3).unwrap(), &mut Outcomes::seeded(0)).unwrap();
        assert!((sv.inner(&ev).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entrance_route_avoids_locked_nodes() {
        let spec = ChipletSpec::square(5, 1, 2);
        let g = build_chiplet_array(&spec).unwrap();
        let layout = allocate_highway(&g, &HighwayConfig::default()).unwrap();
        let r = Router::new(&g, &layout);
        let nq = layout.num_data();
        let mut m = MappingState::trivial(&layout, nq).unwrap();
        let e = layout.backbone().next().unwrap();
        let locked: BTreeSet<NodeId> = [m.phys(0)].into();
        for l in 1..nq {
            let mut out = Vec::new();
            if r.route_to_entrance(l, e, &mut m, &locked, &mut out).is_ok() {
                assert!(g.are_adjacent(m.phys(l), e));
                assert_eq!(m.phys(0), *locked.first().unwrap());
                for gate in &out {
                    let qs = gate.qubits();
                    assert!(g.are_adjacent(qs[0].index(), qs[1].index()));
                    assert!(qs.iter().all(|x| layout.is_data(x.index())));
                }
            }
        }
    }

    #[test]
    fn mapping_stays_bijective() {
        let mut m = MappingState::new(vec![3, 0, 5], 6);
        m.swap(3, 4);
        m.swap(0, 5);
        assert_eq!(m.l2p(), &[4, 5, 0]);
        for (l, &p) in m.l2p().iter().enumerate() {
            assert_eq!(m.logical(p), Some(l));
        }
        assert_eq!(m.logical(3), None);
    }
}
