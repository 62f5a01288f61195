//! Chiplet-array coupling graphs.
//!
//! Every structure is generated from a per-chiplet lattice predicate over
//! local `(row, col)` coordinates. Chiplets are tiled row-major into the
//! array; node ids are dense and ordered by chiplet, then by local row-major
//! coordinate, so every downstream tie-break is reproducible.
//!
//! Cross-chip links join the facing boundary rows/columns of adjacent
//! chiplets at aligned coordinates. The full candidate list for each boundary
//! is kept on the graph so that [`apply_sparsity`] always selects from the
//! unthinned boundary.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TopologyError;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Square,
    Hexagon,
    HeavySquare,
    HeavyHexagon,
}

impl Structure {
    pub const ALL: [Structure; 4] = [
        Structure::Square,
        Structure::Hexagon,
        Structure::HeavySquare,
        Structure::HeavyHexagon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Square => "square",
            Structure::Hexagon => "hexagon",
            Structure::HeavySquare => "heavy_square",
            Structure::HeavyHexagon => "heavy_hexagon",
        }
    }

    /// Whether a qubit sits at local coordinate `(row, col)`.
    fn present(self, row: usize, col: usize) -> bool {
        match self {
            Structure::Square | Structure::Hexagon => true,
            Structure::HeavySquare => row % 2 == 0 || col % 2 == 0,
            Structure::HeavyHexagon => {
                row % 2 == 0 || col % 4 == if row % 4 == 1 { 0 } else { 2 }
            }
        }
    }

    /// Whether the vertical bond below `(row, col)` exists (given both ends
    /// are present).
    fn vertical_bond(self, row: usize, col: usize) -> bool {
        match self {
            Structure::Hexagon => (row + col) % 2 == 0,
            _ => true,
        }
    }
}

impl FromStr for Structure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "square" => Ok(Structure::Square),
            "hexagon" | "hex" => Ok(Structure::Hexagon),
            "heavy_square" => Ok(Structure::HeavySquare),
            "heavy_hexagon" | "heavy_hex" => Ok(Structure::HeavyHexagon),
            other => Err(format!("unknown structure `{other}`")),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exact rational in `(0, 1]`, used for the fraction of boundary links kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u32,
    den: u32,
}

impl Ratio {
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self, TopologyError> {
        if den == 0 || num == 0 || num > den {
            return Err(TopologyError::InvalidSparsity(format!("{num}/{den}")));
        }
        Ok(Ratio { num, den })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    /// `ceil(self * len)`, at least 1 for nonempty boundaries.
    pub fn keep_count(self, len: usize) -> usize {
        if len == 0 {
            return 0;
        }
        let n = len as u64 * self.num as u64;
        let k = n.div_ceil(self.den as u64) as usize;
        k.clamp(1, len)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == self.den {
            write!(f, "1")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TopologyError::InvalidSparsity(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse().map_err(|_| bad())?;
                let d = d.trim().parse().map_err(|_| bad())?;
                Ratio::new(n, d).map_err(|_| bad())
            }
            None => {
                if s == "1" {
                    Ok(Ratio::ONE)
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipletSpec {
    pub structure: Structure,
    pub chiplet_rows: usize,
    pub chiplet_cols: usize,
    pub array_rows: usize,
    pub array_cols: usize,
    pub cross_sparsity: Ratio,
}

impl ChipletSpec {
    pub fn square(chiplet: usize, array_rows: usize, array_cols: usize) -> Self {
        ChipletSpec {
            structure: Structure::Square,
            chiplet_rows: chiplet,
            chiplet_cols: chiplet,
            array_rows,
            array_cols,
            cross_sparsity: Ratio::ONE,
        }
    }

    pub fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    pub fn with_sparsity(mut self, keep: Ratio) -> Self {
        self.cross_sparsity = keep;
        self
    }

    pub fn num_chiplets(&self) -> usize {
        self.array_rows * self.array_cols
    }

    fn validate(&self) -> Result<(), TopologyError> {
        for (name, v) in [
            ("chiplet_rows", self.chiplet_rows),
            ("chiplet_cols", self.chiplet_cols),
            ("array_rows", self.array_rows),
            ("array_cols", self.array_cols),
        ] {
            if v == 0 {
                return Err(TopologyError::ZeroDimension(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    OnChip,
    CrossChip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub chiplet: usize,
    pub local: (usize, usize),
    pub global: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
}

/// Orientation of a chiplet boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryAxis {
    /// Left/right neighbours; links are indexed by local row.
    Vertical,
    /// Top/bottom neighbours; links are indexed by local column.
    Horizontal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub chiplets: (usize, usize),
    pub axis: BoundaryAxis,
    /// Every potential link as `(local offset, node in first chiplet, node in second)`.
    pub candidates: Vec<(usize, NodeId, NodeId)>,
    /// Indices into `candidates` that are currently wired.
    pub kept: Vec<usize>,
}

impl Boundary {
    pub fn kept_links(&self) -> impl Iterator<Item = (usize, NodeId, NodeId)> + '_ {
        self.kept.iter().map(move |&i| self.candidates[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingGraph {
    spec: ChipletSpec,
    nodes: Vec<NodeInfo>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeKind)>>,
    boundaries: Vec<Boundary>,
    grid: Vec<Option<NodeId>>,
}

impl CouplingGraph {
    pub fn spec(&self) -> &ChipletSpec {
        &self.spec
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, n: NodeId) -> &NodeInfo {
        &self.nodes[n]
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn neighbors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[n].iter().map(|&(m, _)| m)
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n].len()
    }

    pub fn edge_kind(&self, a: NodeId, b: NodeId) -> Option<EdgeKind> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|&&(m, _)| m == b)
            .map(|&(_, k)| k)
    }

    pub fn are_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_kind(a, b).is_some()
    }

    pub fn count_edges(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Global grid dimensions `(rows, cols)`.
    pub fn grid_dims(&self) -> (usize, usize) {
        (
            self.spec.chiplet_rows * self.spec.array_rows,
            self.spec.chiplet_cols * self.spec.array_cols,
        )
    }

    pub fn node_at(&self, row: usize, col: usize) -> Option<NodeId> {
        let (rows, cols) = self.grid_dims();
        if row >= rows || col >= cols {
            return None;
        }
        self.grid[row * cols + col]
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        distance_map(self, &[0], &[]).iter().all(Option::is_some)
    }

    fn from_parts(
        spec: ChipletSpec,
        nodes: Vec<NodeInfo>,
        mut edges: Vec<Edge>,
        boundaries: Vec<Boundary>,
        grid: Vec<Option<NodeId>>,
    ) -> Self {
        edges.sort_by_key(|e| (e.a.min(e.b), e.a.max(e.b)));
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            adjacency[e.a].push((e.b, e.kind));
            adjacency[e.b].push((e.a, e.kind));
        }
        for adj in &mut adjacency {
            adj.sort_unstable_by_key(|&(m, _)| m);
        }
        CouplingGraph {
            spec,
            nodes,
            edges,
            adjacency,
            boundaries,
            grid,
        }
    }
}

/// Builds the coupling graph of a chiplet array, thinned to its
/// cross-chip sparsity.
pub fn build_chiplet_array(spec: &ChipletSpec) -> Result<CouplingGraph, TopologyError> {
    spec.validate()?;
    let (r, c) = (spec.chiplet_rows, spec.chiplet_cols);
    let s = spec.structure;
    let grows = r * spec.array_rows;
    let gcols = c * spec.array_cols;
    let mut grid = vec![None; grows * gcols];
    let mut nodes = Vec::new();
    let mut local_ids: Vec<Vec<Option<NodeId>>> = Vec::with_capacity(spec.num_chiplets());

    for ar in 0..spec.array_rows {
        for ac in 0..spec.array_cols {
            let chiplet = ar * spec.array_cols + ac;
            let mut ids = vec![None; r * c];
            for ly in 0..r {
                for lx in 0..c {
                    if !s.present(ly, lx) {
                        continue;
                    }
                    let id = nodes.len();
                    let global = (ar * r + ly, ac * c + lx);
                    nodes.push(NodeInfo {
                        chiplet,
                        local: (ly, lx),
                        global,
                    });
                    ids[ly * c + lx] = Some(id);
                    grid[global.0 * gcols + global.1] = Some(id);
                }
            }
            local_ids.push(ids);
        }
    }

    let at = |chiplet: usize, ly: usize, lx: usize| local_ids[chiplet][ly * c + lx];
    let mut edges = Vec::new();
    for chiplet in 0..spec.num_chiplets() {
        for ly in 0..r {
            for lx in 0..c {
                let Some(u) = at(chiplet, ly, lx) else { continue };
                if lx + 1 < c {
                    if let Some(v) = at(chiplet, ly, lx + 1) {
                        edges.push(Edge {
                            a: u,
                            b: v,
                            kind: EdgeKind::OnChip,
                        });
                    }
                }
                if ly + 1 < r && s.vertical_bond(ly, lx) {
                    if let Some(v) = at(chiplet, ly + 1, lx) {
                        edges.push(Edge {
                            a: u,
                            b: v,
                            kind: EdgeKind::OnChip,
                        });
                    }
                }
            }
        }
    }

    let mut boundaries = Vec::new();
    for ar in 0..spec.array_rows {
        for ac in 0..spec.array_cols {
            let here = ar * spec.array_cols + ac;
            if ac + 1 < spec.array_cols {
                let right = here + 1;
                let candidates: Vec<_> = (0..r)
                    .filter_map(|ly| Some((ly, at(here, ly, c - 1)?, at(right, ly, 0)?)))
                    .collect();
                if candidates.is_empty() {
                    return Err(TopologyError::DisconnectedChiplets(here, right));
                }
                boundaries.push(Boundary {
                    chiplets: (here, right),
                    axis: BoundaryAxis::Vertical,
                    kept: (0..candidates.len()).collect(),
                    candidates,
                });
            }
            if ar + 1 < spec.array_rows {
                let below = here + spec.array_cols;
                let candidates: Vec<_> = (0..c)
                    .filter(|&lx| s.vertical_bond(r - 1, lx))
                    .filter_map(|lx| Some((lx, at(here, r - 1, lx)?, at(below, 0, lx)?)))
                    .collect();
                if candidates.is_empty() {
                    return Err(TopologyError::DisconnectedChiplets(here, below));
                }
                boundaries.push(Boundary {
                    chiplets: (here, below),
                    axis: BoundaryAxis::Horizontal,
                    kept: (0..candidates.len()).collect(),
                    candidates,
                });
            }
        }
    }

    let full = CouplingGraph::from_parts(
        ChipletSpec {
            cross_sparsity: Ratio::ONE,
            ..spec.clone()
        },
        nodes,
        edges,
        boundaries,
        grid,
    );
    let graph = apply_sparsity(&full, spec.cross_sparsity);
    if !graph.is_connected() {
        return Err(TopologyError::Disconnected);
    }
    Ok(graph)
}

/// Indices of `k` out of `len` boundary positions. Positions are taken in
/// farthest-point order (distance to chosen positions and to the virtual
/// ends -1 and `len`), so a smaller selection is always a subset of a
/// larger one. Ties go toward the midpoint, then to the higher index.
pub fn evenly_spaced(len: usize, k: usize) -> Vec<usize> {
    if k >= len {
        return (0..len).collect();
    }
    let mut chosen: BTreeSet<i64> = BTreeSet::from([-1, len as i64]);
    for _ in 0..k {
        let best = (0..len as i64)
            .filter(|p| !chosen.contains(p))
            .max_by_key(|&p| {
                let gap = chosen.iter().map(|&c| c.abs_diff(p)).min().unwrap();
                (gap, std::cmp::Reverse((2 * p).abs_diff(len as i64 - 1)), p)
            })
            .unwrap();
        chosen.insert(best);
    }
    chosen.into_iter().filter(|&p| p >= 0 && p < len as i64).map(|p| p as usize).collect()
}

/// Keeps `ceil(keep * L)` links on every chiplet boundary, chosen from the
/// full candidate list. On-chip edges are untouched.
pub fn apply_sparsity(graph: &CouplingGraph, keep: Ratio) -> CouplingGraph {
    let mut edges: Vec<Edge> = graph
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::OnChip)
        .copied()
        .collect();
    let mut boundaries = graph.boundaries.clone();
    for b in &mut boundaries {
        b.kept = evenly_spaced(b.candidates.len(), keep.keep_count(b.candidates.len()));
        for (_, u, v) in b.kept_links() {
            edges.push(Edge {
                a: u,
                b: v,
                kind: EdgeKind::CrossChip,
            });
        }
    }
    CouplingGraph::from_parts(
        ChipletSpec {
            cross_sparsity: keep,
            ..graph.spec.clone()
        },
        graph.nodes.clone(),
        edges,
        boundaries,
        graph.grid.clone(),
    )
}

/// Multi-source BFS hop counts that never enter `forbidden`.
pub fn distance_map(
    graph: &CouplingGraph,
    sources: &[NodeId],
    forbidden: &[NodeId],
) -> Vec<Option<usize>> {
    let mut blocked = vec![false; graph.num_nodes()];
    for &f in forbidden {
        blocked[f] = true;
    }
    bfs_filtered(graph, sources, |n| !blocked[n])
}

/// BFS from `sources` through nodes accepted by `passable`.
pub fn bfs_filtered(
    graph: &CouplingGraph,
    sources: &[NodeId],
    passable: impl Fn(NodeId) -> bool,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; graph.num_nodes()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() && passable(s) {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap_or(0);
        for v in graph.neighbors(u) {
            if dist[v].is_none() && passable(v) {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}
