//! The compilation loop: commuting frontier, highway gate selection, entrance
//! and highway-path assignment, and dynamic-period shuttles.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::circuit::{
    aggregate_frontier, decompose_to_basis, Circuit, FrontierTracker, Gate, MultiTargetGate, Qubit,
    Timeline,
};
use crate::entanglement::{
    backbone_tree, cat_disentangle, cat_entangle, cat_fanout, ghz_prep_tree, reentangle_entrances, CatComponent,
};
use crate::error::CompileError;
use crate::highway::{entrances_near_filtered, HighwayLayout};
use crate::router::{MappingState, Router};
use crate::topology::{CouplingGraph, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    /// Aggregated gates with at least this many components use the highway.
    pub min_targets: usize,
    /// Measurement latency used for timing estimates.
    pub meas_depth: f64,
    /// Routing weight of a SWAP over a cross-chip link, in on-chip SWAPs.
    pub cross_chip_swap_cost: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            min_targets: 2,
            meas_depth: 2.0,
            cross_chip_swap_cost: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub target: usize,
    pub entrance: NodeId,
    pub t_arr: f64,
    pub t_ava: f64,
    pub t_exe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub control: usize,
    pub control_entrance: NodeId,
    pub conjugated: bool,
    /// Highway nodes owned by this gate, slots included.
    pub nodes: Vec<NodeId>,
    /// Highway edges joining `nodes` into a tree.
    pub edges: Vec<(NodeId, NodeId)>,
    pub components: Vec<ComponentRecord>,
    /// Logical targets left for a later shuttle.
    pub deferred: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuttleRecord {
    pub index: usize,
    pub start_time: f64,
    pub period_end: f64,
    pub frozen: bool,
    pub gates: Vec<GateRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileStats {
    pub rounds: usize,
    pub shuttles: usize,
    pub highway_gates: usize,
    pub highway_components: usize,
    pub residual_gates: usize,
    pub swaps: usize,
    pub bridges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledProgram {
    pub circuit: Circuit,
    /// Physical node of each logical qubit before and after execution.
    pub initial_map: Vec<NodeId>,
    pub final_map: Vec<NodeId>,
    pub shuttles: Vec<ShuttleRecord>,
    pub stats: CompileStats,
}

/// Splits aggregated groups into highway gates and the source indices of
/// gates left to the local router.
pub fn select_highway_gates(groups: &[MultiTargetGate], min_targets: usize) -> (Vec<MultiTargetGate>, Vec<usize>) {
    let mut highway = Vec::new();
    let mut residual = Vec::new();
    for g in groups {
        if g.len() >= min_targets.max(1) {
            highway.push(g.clone());
        } else {
            residual.extend(&g.sources);
        }
    }
    (highway, residual)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntranceCandidate {
    pub entrance: NodeId,
    pub distance: usize,
    pub t_arr: f64,
    pub t_ava: f64,
    pub t_exe: f64,
}

/// Candidates ordered by earliest execution time, then distance, then id.
/// Arrival costs one SWAP (depth 3) per hop beyond the first.
pub fn assign_entrance(
    candidates: &[(NodeId, usize)],
    qubit_time: f64,
    available: impl Fn(NodeId) -> f64,
) -> Vec<EntranceCandidate> {
    let mut out: Vec<EntranceCandidate> = candidates
        .iter()
        .map(|&(entrance, distance)| {
            let t_arr = qubit_time + 3.0 * distance.saturating_sub(1) as f64;
            let t_ava = available(entrance);
            EntranceCandidate {
                entrance,
                distance,
                t_arr,
                t_ava,
                t_exe: t_arr.max(t_ava),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.t_exe
            .total_cmp(&b.t_exe)
            .then(a.distance.cmp(&b.distance))
            .then(a.entrance.cmp(&b.entrance))
    });
    out
}

/// Cheapest highway path from the gate's own nodes to `target`: own nodes
/// are free, unowned nodes cost one, nodes of other gates are walls. The
/// returned path starts at an own node; `None` means the component waits.
pub fn assign_highway_path(
    layout: &HighwayLayout,
    own: &BTreeSet<NodeId>,
    occupied_by_others: impl Fn(NodeId) -> bool,
    target: NodeId,
) -> Option<Vec<NodeId>> {
    use std::cmp::Reverse;
    if own.contains(&target) {
        return Some(vec![target]);
    }
    let n = layout.roles().len();
    let mut dist = vec![usize::MAX; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &s in own {
        dist[s] = 0;
        heap.push(Reverse((0, s)));
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == target {
            let mut path = vec![u];
            while prev[*path.last().unwrap()] != usize::MAX {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            return Some(path);
        }
        for &v in layout.highway_neighbors(u) {
            if occupied_by_others(v) {
                continue;
            }
            let nd = d + usize::from(!own.contains(&v));
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    None
}

struct PlannedComponent {
    route: Vec<Gate>,
    comp: CatComponent,
}

struct PlannedGate {
    gate: MultiTargetGate,
    control_route: Vec<Gate>,
    control_phys: NodeId,
    control_entrance: NodeId,
    components: Vec<PlannedComponent>,
    record: GateRecord,
    executed: Vec<usize>,
}

struct Compiler<'a> {
    graph: &'a CouplingGraph,
    layout: &'a HighwayLayout,
    router: Router<'a>,
    mapping: MappingState,
    out: Circuit,
    timeline: Timeline,
    synced: usize,
    shuttles: Vec<ShuttleRecord>,
    stats: CompileStats,
}

fn q(n: NodeId) -> Qubit {
    Qubit(n as u32)
}

impl<'a> Compiler<'a> {
    fn sync(&mut self) {
        for op in &self.out.ops()[self.synced..] {
            self.timeline.apply(&op.gate);
            match op.gate {
                Gate::Swap(..) => self.stats.swaps += 1,
                Gate::Bridge(..) => self.stats.bridges += 1,
                _ => {}
            }
        }
        self.synced = self.out.len();
    }

    fn emit_all(&mut self, gates: impl IntoIterator<Item = Gate>) {
        self.out.extend(gates);
        self.sync();
    }

    /// Entrances reachable from `p`, widening the radius from 2 until some
    /// candidate survives `keep`.
    fn entrances(
        &self,
        p: NodeId,
        passable: impl Fn(NodeId) -> bool,
        keep: impl Fn(NodeId) -> bool,
    ) -> Vec<(NodeId, usize)> {
        let n = self.graph.num_nodes();
        let mut radius = 2;
        loop {
            let found: Vec<_> = entrances_near_filtered(self.layout, self.graph, p, radius, &passable)
                .into_iter()
                .filter(|&(e, _)| keep(e))
                .collect();
            if !found.is_empty() || radius >= n {
                return found;
            }
            radius *= 2;
        }
    }

    fn route_residual(&mut self, c: &Circuit, src: usize) -> Result<(), CompileError> {
        let Gate::Cx(a, b) = *c.gate(src) else {
            unreachable!("residual gates are CX");
        };
        let mut buf = Vec::new();
        self.router
            .route_offhighway_gate(a.index(), b.index(), &mut self.mapping, &mut buf)?;
        self.emit_all(buf);
        self.stats.residual_gates += 1;
        Ok(())
    }

    /// One shuttle over the highway gates. Returns executed source indices.
    fn shuttle(&mut self, gates: &[MultiTargetGate]) -> Result<Vec<usize>, CompileError> {
        let mut owner: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut last_use: BTreeMap<NodeId, f64> = BTreeMap::new();
        let mut used: BTreeSet<usize> = BTreeSet::new();
        let mut frozen = false;
        let mut period_end = f64::NEG_INFINITY;
        let mut planned: Vec<PlannedGate> = Vec::new();

        for (gid, g) in gates.iter().enumerate() {
            if g.qubits().any(|x| used.contains(&x.index())) {
                continue;
            }
            let ctrl = g.control.index();
            let pc = self.mapping.phys(ctrl);
            let avail = |e: NodeId, last: &BTreeMap<NodeId, f64>| {
                let t = self.timeline.qubit_time(e);
                last.get(&e).map_or(t, |&u| t.max(u + 1.0))
            };
            let cands = self.entrances(pc, |_| true, |e| owner.get(&e).is_none_or(|&o| o == gid));
            let ranked = assign_entrance(&cands, self.timeline.qubit_time(pc), |e| avail(e, &last_use));
            let Some(best) = ranked.first().copied() else {
                continue;
            };
            if frozen && best.t_exe > period_end {
                continue;
            }
            used.extend(g.qubits().map(|x| x.index()));
            let e_c = best.entrance;
            let mut control_route = Vec::new();
            self.router
                .route_to_entrance(ctrl, e_c, &mut self.mapping, &BTreeSet::new(), &mut control_route)?;
            let control_phys = self.mapping.phys(ctrl);
            let locked = BTreeSet::from([control_phys]);
            let mut own = BTreeSet::from([e_c]);
            owner.insert(e_c, gid);
            last_use.insert(e_c, best.t_exe);
            let mut tree_edges = Vec::new();

            // Targets nearest the highway go first.
            let mut order: Vec<(usize, usize)> = g
                .components
                .iter()
                .enumerate()
                .map(|(k, comp)| {
                    let p = self.mapping.phys(comp.target.index());
                    let d = self
                        .entrances(p, |v| !locked.contains(&v), |_| true)
                        .first()
                        .map_or(usize::MAX, |c| c.1);
                    (d, k)
                })
                .collect();
            order.sort_by_key(|&(d, k)| (d, g.components[k].target, k));

            let mut components = Vec::new();
            let mut records = Vec::new();
            let mut deferred = Vec::new();
            let mut executed = Vec::new();
            let mut gate_period = best.t_exe;
            for (_, k) in order {
                let comp = g.components[k];
                let t = comp.target.index();
                let pt = self.mapping.phys(t);
                let cands = self.entrances(
                    pt,
                    |v| !locked.contains(&v),
                    |e| e != e_c && owner.get(&e).is_none_or(|&o| o == gid),
                );
                let ranked = assign_entrance(&cands, self.timeline.qubit_time(pt), |e| avail(e, &last_use));
                let choice = ranked.iter().find_map(|cand| {
                    assign_highway_path(
                        self.layout,
                        &own,
                        |v| owner.get(&v).is_some_and(|&o| o != gid),
                        cand.entrance,
                    )
                    .map(|path| (*cand, path))
                });
                let Some((cand, path)) = choice else {
                    frozen = true;
                    deferred.push(t);
                    continue;
                };
                if frozen && cand.t_exe > period_end.max(gate_period) {
                    deferred.push(t);
                    continue;
                }
                gate_period = gate_period.max(cand.t_exe);
                for w in path.windows(2) {
                    tree_edges.push((w[0], w[1]));
                }
                for &v in &path {
                    own.insert(v);
                    debug_assert!(owner.get(&v).is_none_or(|&o| o == gid));
                    owner.insert(v, gid);
                }
                last_use.insert(cand.entrance, cand.t_exe);
                let mut route = Vec::new();
                self.router
                    .route_to_entrance(t, cand.entrance, &mut self.mapping, &locked, &mut route)?;
                components.push(PlannedComponent {
                    route,
                    comp: CatComponent {
                        target: self.mapping.phys(t),
                        entrance: cand.entrance,
                        kind: comp.kind,
                    },
                });
                records.push(ComponentRecord {
                    target: t,
                    entrance: cand.entrance,
                    t_arr: cand.t_arr,
                    t_ava: cand.t_ava,
                    t_exe: cand.t_exe,
                });
                executed.push(g.sources[k]);
            }
            if !frozen {
                period_end = period_end.max(gate_period);
            }
            if components.is_empty() {
                owner.retain(|_, o| *o != gid);
            }
            planned.push(PlannedGate {
                gate: g.clone(),
                control_route,
                control_phys,
                control_entrance: e_c,
                components,
                record: GateRecord {
                    control: ctrl,
                    control_entrance: e_c,
                    conjugated: g.conjugated,
                    nodes: own.into_iter().collect(),
                    edges: tree_edges,
                    components: records,
                    deferred,
                },
                executed,
            });
        }

        let placed = planned.iter().any(|p| !p.components.is_empty());
        let start_time = planned
            .iter()
            .filter(|p| !p.components.is_empty())
            .flat_map(|p| p.record.nodes.iter())
            .map(|&v| self.timeline.qubit_time(v))
            .fold(0.0, f64::max);

        // Preparation of every gate's GHZ resource precedes all bodies.
        let mut others_of = Vec::with_capacity(planned.len());
        for p in &planned {
            if p.components.is_empty() {
                others_of.push(Vec::new());
                continue;
            }
            let tree = backbone_tree(self.layout, &p.record.edges)?;
            let frag = ghz_prep_tree(self.graph, &tree, p.control_entrance, &[p.control_entrance])?;
            self.out.append_fresh_bits(&frag.circuit);
            let mut needed: Vec<NodeId> = p
                .components
                .iter()
                .map(|c| c.comp.entrance)
                .filter(|e| frag.measured.contains(e))
                .collect();
            needed.sort_unstable();
            needed.dedup();
            let mut ghz: Vec<NodeId> = frag.surviving.clone();
            if !needed.is_empty() {
                let re = reentangle_entrances(self.graph, self.layout, &frag.surviving, &needed, &BTreeMap::new())?;
                self.out.append_fresh_bits(&re.circuit);
                ghz = re.surviving;
            }
            others_of.push(ghz.into_iter().filter(|&v| v != p.control_entrance).collect::<Vec<_>>());
        }
        self.sync();

        let mut executed = Vec::new();
        let mut records = Vec::new();
        for (p, others) in planned.into_iter().zip(others_of) {
            self.out.extend(p.control_route);
            if p.components.is_empty() {
                self.sync();
                continue;
            }
            let conj = p.gate.conjugated;
            if conj {
                self.out.push(Gate::H(q(p.control_phys)));
            }
            cat_entangle(&mut self.out, p.control_phys, p.control_entrance, &others);
            for pc in &p.components {
                self.out.extend(pc.route.iter().cloned());
                if conj {
                    self.out.push(Gate::H(q(pc.comp.target)));
                }
                cat_fanout(&mut self.out, &pc.comp);
                if conj {
                    self.out.push(Gate::H(q(pc.comp.target)));
                }
            }
            cat_disentangle(&mut self.out, p.control_phys, &others);
            if conj {
                self.out.push(Gate::H(q(p.control_phys)));
            }
            self.sync();
            self.stats.highway_gates += 1;
            self.stats.highway_components += p.components.len();
            executed.extend(p.executed);
            records.push(p.record);
        }
        if placed {
            self.stats.shuttles += 1;
            self.shuttles.push(ShuttleRecord {
                index: self.shuttles.len(),
                start_time,
                period_end: if period_end.is_finite() { period_end } else { start_time },
                frozen,
                gates: records,
            });
        }
        Ok(executed)
    }
}

/// Compiles `c` onto `graph` with the given highway. Logical qubit i starts
/// on the i-th data node in id order.
pub fn compile(
    c: &Circuit,
    graph: &CouplingGraph,
    layout: &HighwayLayout,
    cfg: &SchedulerConfig,
) -> Result<CompiledProgram, CompileError> {
    let c = decompose_to_basis(c);
    c.validate()?;
    let mapping = MappingState::trivial(layout, c.num_qubits())?;
    let initial_map = mapping.l2p().to_vec();
    let n = graph.num_nodes();
    let mut cx = Compiler {
        graph,
        layout,
        router: Router::new(graph, layout).with_cross_chip_cost(cfg.cross_chip_swap_cost),
        mapping,
        out: Circuit::with_bits(n, c.num_bits()),
        timeline: Timeline::new(n, cfg.meas_depth),
        synced: 0,
        shuttles: Vec::new(),
        stats: CompileStats::default(),
    };
    let has_highway = layout.num_backbone() > 0;
    let mut tracker = FrontierTracker::new(&c);
    while !tracker.is_done() {
        cx.stats.rounds += 1;
        let frontier = tracker.frontier();
        let single: Vec<usize> = frontier
            .iter()
            .copied()
            .filter(|&i| !matches!(c.gate(i), Gate::Cx(..)))
            .collect();
        if !single.is_empty() {
            for i in single {
                let g = c.gate(i).map_qubits(|x| q(cx.mapping.phys(x.index())));
                cx.emit_all([g]);
                tracker.execute(i);
            }
            continue;
        }
        let agg = aggregate_frontier(&c, &frontier);
        let (highway, mut residual) = if has_highway {
            select_highway_gates(&agg.groups, cfg.min_targets)
        } else {
            (Vec::new(), agg.groups.iter().flat_map(|g| g.sources.iter().copied()).collect())
        };
        if !highway.is_empty() {
            let done = cx.shuttle(&highway)?;
            if done.is_empty() {
                residual.extend(highway.iter().flat_map(|g| g.sources.iter().copied()));
            }
            for i in done {
                tracker.execute(i);
            }
        }
        residual.sort_unstable();
        for i in residual {
            cx.route_residual(&c, i)?;
            tracker.execute(i);
        }
    }
    Ok(CompiledProgram {
        circuit: cx.out,
        initial_map,
        final_map: cx.mapping.l2p().to_vec(),
        shuttles: cx.shuttles,
        stats: cx.stats,
    })
}
