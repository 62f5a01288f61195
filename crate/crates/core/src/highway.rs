//! Highway allocation: mesh lines of ancillary qubits across the chiplet array.
//!
//! Each line is a corridor path through the coupling graph. Line ends,
//! crossroads and cross-chip link endpoints are always backbone; between them
//! backbone nodes alternate with interleave slots (data qubits that bridge
//! gates pass over). A gap with an even number of free nodes gets one
//! adjacent backbone pair, placed next to a crossroad when there is one.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::HighwayError;
use crate::topology::{BoundaryAxis, CouplingGraph, EdgeKind, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighwayConfig {
    /// Row spacing of horizontal lines; defaults to the chiplet height.
    pub mesh_period_rows: Option<usize>,
    /// Column spacing of vertical lines; defaults to the chiplet width.
    pub mesh_period_cols: Option<usize>,
    pub density_multiplier: usize,
    pub interleave: bool,
    /// Offset of horizontal lines inside each period. A value at or beyond
    /// the period disables horizontal lines.
    pub row_offset: Option<usize>,
    pub col_offset: Option<usize>,
}

impl Default for HighwayConfig {
    fn default() -> Self {
        HighwayConfig {
            mesh_period_rows: None,
            mesh_period_cols: None,
            density_multiplier: 1,
            interleave: true,
            row_offset: None,
            col_offset: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Data,
    Backbone,
    InterleaveSlot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighwayLayout {
    roles: Vec<NodeRole>,
    lines: Vec<Vec<NodeId>>,
    crossroads: Vec<NodeId>,
    segments: Vec<Vec<NodeId>>,
    #[serde(skip)]
    adjacency: Vec<Vec<NodeId>>,
    entrance_adjacency: BTreeMap<NodeId, Vec<NodeId>>,
}

impl HighwayLayout {
    pub fn role(&self, n: NodeId) -> NodeRole {
        self.roles[n]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn is_backbone(&self, n: NodeId) -> bool {
        self.roles[n] == NodeRole::Backbone
    }

    /// Data nodes, slots included.
    pub fn is_data(&self, n: NodeId) -> bool {
        self.roles[n] != NodeRole::Backbone
    }

    /// Backbone or slot.
    pub fn on_highway(&self, n: NodeId) -> bool {
        self.roles[n] != NodeRole::Data
    }

    pub fn backbone(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.roles.len()).filter(|&n| self.is_backbone(n))
    }

    pub fn data_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.roles.len()).filter(|&n| self.is_data(n))
    }

    pub fn num_backbone(&self) -> usize {
        self.backbone().count()
    }

    pub fn num_data(&self) -> usize {
        self.roles.len() - self.num_backbone()
    }

    /// Backbone qubits over all physical qubits.
    pub fn highway_fraction(&self) -> f64 {
        self.num_backbone() as f64 / self.roles.len() as f64
    }

    pub fn lines(&self) -> &[Vec<NodeId>] {
        &self.lines
    }

    pub fn crossroads(&self) -> &[NodeId] {
        &self.crossroads
    }

    /// Highway paths between consecutive critical qubits, slots included.
    pub fn path_segments(&self) -> &[Vec<NodeId>] {
        &self.segments
    }

    /// Neighbours along highway lines (backbone and slots).
    pub fn highway_neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.adjacency[n]
    }

    pub fn highway_degree(&self, n: NodeId) -> usize {
        self.adjacency[n].len()
    }

    /// Backbone node → adjacent data nodes.
    pub fn entrance_adjacency(&self) -> &BTreeMap<NodeId, Vec<NodeId>> {
        &self.entrance_adjacency
    }

    /// A layout with no highway at all; every node is data.
    pub fn empty(graph: &CouplingGraph) -> Self {
        let n = graph.num_nodes();
        HighwayLayout {
            roles: vec![NodeRole::Data; n],
            lines: Vec::new(),
            crossroads: Vec::new(),
            segments: Vec::new(),
            adjacency: vec![Vec::new(); n],
            entrance_adjacency: BTreeMap::new(),
        }
    }

    #[cfg(test)]
    pub(crate) fn with_backbone(mut self, nodes: &[NodeId]) -> Self {
        for &n in nodes {
            self.roles[n] = NodeRole::Backbone;
        }
        self
    }

    /// Rebuilds the highway adjacency after deserialization.
    pub fn restore_adjacency(&mut self) {
        self.adjacency = line_adjacency(self.roles.len(), &self.lines);
    }
}

/// Crossroads plus line ends (highway degree other than 2).
pub fn critical_qubits(layout: &HighwayLayout) -> Vec<NodeId> {
    (0..layout.roles.len())
        .filter(|&n| layout.on_highway(n) && layout.highway_degree(n) != 2)
        .collect()
}

/// Backbone nodes within `radius` hops of data node `q`, walking through data
/// nodes only; sorted by distance then id.
pub fn entrances_near(
    layout: &HighwayLayout,
    graph: &CouplingGraph,
    q: NodeId,
    radius: usize,
) -> Vec<(NodeId, usize)> {
    entrances_near_filtered(layout, graph, q, radius, |_| true)
}

/// As [`entrances_near`], treating data nodes rejected by `passable` as walls.
pub fn entrances_near_filtered(
    layout: &HighwayLayout,
    graph: &CouplingGraph,
    q: NodeId,
    radius: usize,
    passable: impl Fn(NodeId) -> bool,
) -> Vec<(NodeId, usize)> {
    let mut out = BTreeMap::new();
    if radius == 0 {
        return Vec::new();
    }
    let mut dist = BTreeMap::from([(q, 0usize)]);
    let mut queue = VecDeque::from([q]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for v in graph.neighbors(u) {
            if layout.is_backbone(v) {
                out.entry(v).or_insert(d + 1);
            } else if d + 1 < radius && passable(v) && !dist.contains_key(&v) {
                dist.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    let mut v: Vec<_> = out.into_iter().filter(|&(_, d)| d <= radius).collect();
    v.sort_by_key(|&(n, d)| (d, n));
    v
}

#[derive(Clone, Copy)]
enum Dir {
    Horizontal,
    Vertical,
}

pub fn allocate_highway(
    graph: &CouplingGraph,
    cfg: &HighwayConfig,
) -> Result<HighwayLayout, HighwayError> {
    let spec = graph.spec();
    if cfg.density_multiplier == 0 {
        return Err(HighwayError::BadDensity);
    }
    let period_r = cfg.mesh_period_rows.unwrap_or(spec.chiplet_rows);
    let period_c = cfg.mesh_period_cols.unwrap_or(spec.chiplet_cols);
    if period_r < 2 {
        return Err(HighwayError::BadPeriod("mesh_period_rows"));
    }
    if period_c < 2 {
        return Err(HighwayError::BadPeriod("mesh_period_cols"));
    }

    let mut lines = Vec::new();
    for coord in line_coords(graph, Dir::Horizontal, period_r, cfg.row_offset, cfg.density_multiplier)? {
        lines.push(corridor_line(graph, Dir::Horizontal, coord).ok_or(HighwayError::NoLinePlacement("horizontal"))?);
    }
    for coord in line_coords(graph, Dir::Vertical, period_c, cfg.col_offset, cfg.density_multiplier)? {
        lines.push(corridor_line(graph, Dir::Vertical, coord).ok_or(HighwayError::NoLinePlacement("vertical"))?);
    }
    if lines.is_empty() {
        return Err(HighwayError::Empty);
    }

    let n = graph.num_nodes();
    let adjacency = line_adjacency(n, &lines);
    let mut membership = vec![0usize; n];
    for line in &lines {
        for &v in line.iter().collect::<BTreeSet<_>>() {
            membership[v] += 1;
        }
    }
    let crossroads: Vec<NodeId> = (0..n).filter(|&v| adjacency[v].len() >= 3).collect();
    let is_cross = |v: NodeId| adjacency[v].len() >= 3;

    let mut roles = vec![NodeRole::Data; n];
    for line in &lines {
        let last = line.len() - 1;
        let fixed: Vec<usize> = (0..line.len())
            .filter(|&i| {
                let v = line[i];
                i == 0
                    || i == last
                    || membership[v] >= 2
                    || is_cross(v)
                    || (i > 0 && graph.edge_kind(line[i - 1], v) == Some(EdgeKind::CrossChip))
                    || (i < last && graph.edge_kind(v, line[i + 1]) == Some(EdgeKind::CrossChip))
            })
            .collect();
        for &i in &fixed {
            roles[line[i]] = NodeRole::Backbone;
        }
        for w in fixed.windows(2) {
            let (a, b) = (w[0], w[1]);
            let k = b - a - 1;
            for (j, i) in (a + 1..b).enumerate() {
                let role = if !cfg.interleave {
                    NodeRole::Backbone
                } else if k % 2 == 1 {
                    if j % 2 == 0 { NodeRole::InterleaveSlot } else { NodeRole::Backbone }
                } else if !is_cross(line[a]) && is_cross(line[b]) {
                    // Pair sits against the far end: S B S ... B.
                    if j % 2 == 0 { NodeRole::InterleaveSlot } else { NodeRole::Backbone }
                } else if j % 2 == 0 {
                    NodeRole::Backbone
                } else {
                    NodeRole::InterleaveSlot
                };
                if roles[line[i]] != NodeRole::Backbone {
                    roles[line[i]] = role;
                }
            }
        }
    }

    let layout = finish_layout(graph, roles, lines, crossroads, adjacency);
    validate_layout(graph, &layout)?;
    Ok(layout)
}

fn line_adjacency(n: usize, lines: &[Vec<NodeId>]) -> Vec<Vec<NodeId>> {
    let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for line in lines {
        for w in line.windows(2) {
            adj[w[0]].insert(w[1]);
            adj[w[1]].insert(w[0]);
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

fn finish_layout(
    graph: &CouplingGraph,
    roles: Vec<NodeRole>,
    lines: Vec<Vec<NodeId>>,
    crossroads: Vec<NodeId>,
    adjacency: Vec<Vec<NodeId>>,
) -> HighwayLayout {
    let mut entrance_adjacency = BTreeMap::new();
    for v in 0..roles.len() {
        if roles[v] == NodeRole::Backbone {
            let data: Vec<_> = graph
                .neighbors(v)
                .filter(|&u| roles[u] != NodeRole::Backbone)
                .collect();
            entrance_adjacency.insert(v, data);
        }
    }
    let critical: BTreeSet<NodeId> = (0..roles.len())
        .filter(|&v| roles[v] != NodeRole::Data && adjacency[v].len() != 2)
        .collect();
    let mut segments = Vec::new();
    let mut seen = BTreeSet::new();
    for &c in &critical {
        for &first in &adjacency[c] {
            if seen.contains(&(c, first)) {
                continue;
            }
            let mut path = vec![c, first];
            let (mut prev, mut cur) = (c, first);
            while !critical.contains(&cur) {
                let Some(&next) = adjacency[cur].iter().find(|&&x| x != prev) else { break };
                path.push(next);
                prev = cur;
                cur = next;
            }
            seen.insert((c, first));
            seen.insert((cur, prev));
            segments.push(path);
        }
    }
    // Highway without any critical node is a cycle; keep it as one segment.
    if critical.is_empty() {
        if let Some(line) = lines.first() {
            segments.push(line.clone());
        }
    }
    HighwayLayout {
        roles,
        lines,
        crossroads,
        segments,
        adjacency,
        entrance_adjacency,
    }
}

fn validate_layout(graph: &CouplingGraph, layout: &HighwayLayout) -> Result<(), HighwayError> {
    let hw: Vec<NodeId> = (0..graph.num_nodes()).filter(|&v| layout.on_highway(v)).collect();
    if hw.is_empty() {
        return Err(HighwayError::Empty);
    }
    let mut seen = BTreeSet::from([hw[0]]);
    let mut stack = vec![hw[0]];
    while let Some(u) = stack.pop() {
        for &v in layout.highway_neighbors(u) {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    if seen.len() != hw.len() {
        return Err(HighwayError::Disconnected);
    }
    for chiplet in 0..graph.spec().num_chiplets() {
        let covered = (0..graph.num_nodes())
            .any(|v| graph.node(v).chiplet == chiplet && layout.is_backbone(v));
        if !covered {
            return Err(HighwayError::UncoveredChiplet(chiplet));
        }
    }
    let backbone: Vec<NodeId> = layout.backbone().collect();
    // Data nodes must reach a backbone node through data nodes only.
    let mut dist = vec![None; graph.num_nodes()];
    let mut queue = VecDeque::new();
    for &b in &backbone {
        for u in graph.neighbors(b) {
            if layout.is_data(u) && dist[u].is_none() {
                dist[u] = Some(1usize);
                queue.push_back(u);
            }
        }
    }
    while let Some(u) = queue.pop_front() {
        for v in graph.neighbors(u) {
            if layout.is_data(v) && dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap_or(0) + 1);
                queue.push_back(v);
            }
        }
    }
    for v in layout.data_nodes() {
        if dist[v].is_none() {
            return Err(HighwayError::UnreachableData(v));
        }
    }
    Ok(())
}

/// Global rows (or columns) of every line in direction `dir`, shifted so each
/// crosses its chiplet boundaries at kept links.
fn line_coords(
    graph: &CouplingGraph,
    dir: Dir,
    period: usize,
    offset: Option<usize>,
    density: usize,
) -> Result<Vec<usize>, HighwayError> {
    let spec = graph.spec();
    let (grows, gcols) = graph.grid_dims();
    let (extent, chip) = match dir {
        Dir::Horizontal => (grows, spec.chiplet_rows),
        Dir::Vertical => (gcols, spec.chiplet_cols),
    };
    let offsets = match (offset, density) {
        (Some(o), _) if o >= period => return Ok(Vec::new()),
        (Some(o), 1) => vec![o],
        (None, 1) => vec![3.min((period - 1) / 2)],
        (_, m) => crate::topology::evenly_spaced(period, m),
    };
    let name = match dir {
        Dir::Horizontal => "horizontal",
        Dir::Vertical => "vertical",
    };
    let mut coords = BTreeSet::new();
    let mut base = 0;
    while base < extent {
        for &o in &offsets {
            let want = base + o;
            if want >= extent {
                continue;
            }
            let band = want / chip;
            let local = want % chip;
            let ok = |l: usize| kept_on_band(graph, dir, band, l);
            let best = (0..chip)
                .filter(|&l| ok(l))
                .min_by_key(|&l| (l.abs_diff(local), l))
                .ok_or(HighwayError::NoLinePlacement(name))?;
            coords.insert(band * chip + best);
        }
        base += period;
    }
    Ok(coords.into_iter().collect())
}

/// Whether every boundary crossed by a line at local offset `l` in chiplet
/// band `band` keeps the link at that offset.
fn kept_on_band(graph: &CouplingGraph, dir: Dir, band: usize, l: usize) -> bool {
    let spec = graph.spec();
    let axis = match dir {
        Dir::Horizontal => BoundaryAxis::Vertical,
        Dir::Vertical => BoundaryAxis::Horizontal,
    };
    let band_of = |c: usize| match dir {
        Dir::Horizontal => c / spec.array_cols,
        Dir::Vertical => c % spec.array_cols,
    };
    graph
        .boundaries()
        .iter()
        .filter(|b| b.axis == axis && band_of(b.chiplets.0) == band)
        .all(|b| b.kept_links().any(|(off, _, _)| off == l))
}

/// Cheapest path across the whole grid that stays within two rows (columns) of
/// `coord`: fewest hops first, then least drift off `coord`.
fn corridor_line(graph: &CouplingGraph, dir: Dir, coord: usize) -> Option<Vec<NodeId>> {
    let (grows, gcols) = graph.grid_dims();
    let (along_len, across_len) = match dir {
        Dir::Horizontal => (gcols, grows),
        Dir::Vertical => (grows, gcols),
    };
    let split = |v: NodeId| {
        let (r, c) = graph.node(v).global;
        match dir {
            Dir::Horizontal => (c, r),
            Dir::Vertical => (r, c),
        }
    };
    let lo = coord.saturating_sub(2);
    let hi = (coord + 2).min(across_len - 1);
    let in_corridor = |v: NodeId| (lo..=hi).contains(&split(v).1);
    const HOP: u64 = 1 << 20;
    let drift = |v: NodeId| split(v).1.abs_diff(coord) as u64;

    let n = graph.num_nodes();
    let mut cost = vec![u64::MAX; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for v in 0..n {
        if in_corridor(v) && split(v).0 == 0 {
            cost[v] = drift(v);
            heap.push(Reverse((cost[v], v)));
        }
    }
    let mut best_end: Option<NodeId> = None;
    while let Some(Reverse((c, u))) = heap.pop() {
        if c > cost[u] {
            continue;
        }
        if split(u).0 == along_len - 1 {
            best_end = Some(u);
            break;
        }
        for v in graph.neighbors(u) {
            if !in_corridor(v) {
                continue;
            }
            let nc = c + HOP + drift(v);
            if nc < cost[v] || (nc == cost[v] && u < prev[v]) {
                cost[v] = nc;
                prev[v] = u;
                heap.push(Reverse((nc, v)));
            }
        }
    }
    let mut path = vec![best_end?];
    while prev[*path.last()?] != usize::MAX {
        path.push(prev[*path.last()?]);
    }
    path.reverse();
    Some(path)
}
