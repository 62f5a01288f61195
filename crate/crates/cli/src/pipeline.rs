//! Building targets, compiling circuits and reading/writing artifacts.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

use mech::circuit::{parse_circuit, write_circuit, Circuit};
use mech::highway::{allocate_highway, HighwayLayout};
use mech::metrics::{count_ops, Benchmark, BenchmarkKind, ErrorModel, Metrics};
use mech::router::baseline_compile;
use mech::scheduler::{compile, CompileStats, CompiledProgram, ShuttleRecord};
use mech::sim::{verify, QubitMap, VerifyReport};
use mech::topology::{build_chiplet_array, CouplingGraph, NodeId};

use crate::{Config, FORMAT_VERSION};

/// A benchmark name with an optional size; without one the benchmark fills
/// every data qubit of the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchSpec {
    pub kind: BenchmarkKind,
    pub size: Option<usize>,
}

impl BenchSpec {
    pub fn resolve(self, target: &Target) -> Benchmark {
        Benchmark::new(self.kind, self.size.unwrap_or(target.layout.num_data()))
    }
}

impl FromStr for BenchSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains('-') {
            let b: Benchmark = s.parse()?;
            return Ok(BenchSpec { kind: b.kind, size: Some(b.size) });
        }
        BenchmarkKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .map(|kind| BenchSpec { kind, size: None })
            .ok_or_else(|| format!("unknown benchmark `{s}` (expected qft, qaoa, vqe or bv)"))
    }
}

impl fmt::Display for BenchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.size {
            Some(n) => write!(f, "{}-{n}", self.kind.name()),
            None => f.write_str(self.kind.name()),
        }
    }
}

/// Coupling graph plus highway for one configuration.
pub struct Target {
    pub graph: CouplingGraph,
    pub layout: HighwayLayout,
}

impl Target {
    pub fn build(cfg: &Config) -> Result<Target> {
        let graph = build_chiplet_array(&cfg.chiplet_spec()).context("building the chiplet array")?;
        let layout = allocate_highway(&graph, &cfg.highway_config()).context("allocating the highway")?;
        Ok(Target { graph, layout })
    }

    /// The same graph with every node left as a data qubit.
    pub fn without_highway(&self) -> HighwayLayout {
        HighwayLayout::empty(&self.graph)
    }
}

/// One compilation with its metrics.
pub struct Compiled {
    pub program: CompiledProgram,
    pub metrics: Metrics,
    pub highway: bool,
}

pub fn compile_on(cfg: &Config, target: &Target, circuit: &Circuit, highway: bool) -> Result<Compiled> {
    let sched = cfg.scheduler_config();
    let (program, layout) = if highway {
        (compile(circuit, &target.graph, &target.layout, &sched)?, &target.layout)
    } else {
        (baseline_compile(circuit, &target.graph, &sched)?, &target.without_highway())
    };
    let metrics = count_ops(&program.circuit, &target.graph, layout, &cfg.error_model())?;
    Ok(Compiled { program, metrics, highway })
}

/// Metrics of an already compiled program under another error model.
pub fn remeasure(compiled: &Compiled, target: &Target, model: &ErrorModel) -> Result<Metrics> {
    let layout = if compiled.highway { target.layout.clone() } else { target.without_highway() };
    Ok(count_ops(&compiled.program.circuit, &target.graph, &layout, model)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub program: String,
    pub highway: bool,
    pub logical_qubits: usize,
    pub physical_qubits: usize,
    pub n_on: u64,
    pub n_cross: u64,
    pub n_meas: u64,
    pub depth: f64,
    pub eff_cnots: f64,
    pub highway_fraction: f64,
}

/// Everything `verify` needs besides the two circuits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub program: String,
    pub highway: bool,
    pub config: Config,
    pub initial_map: Vec<NodeId>,
    pub final_map: Vec<NodeId>,
    pub stats: CompileStats,
    pub backbone: Vec<NodeId>,
    pub shuttles: Vec<ShuttleRecord>,
}

pub const ORIGINAL_FILE: &str = "original.txt";
pub const CIRCUIT_FILE: &str = "compiled.txt";
pub const SIDECAR_FILE: &str = "compile.json";
pub const METRICS_FILE: &str = "metrics.json";

impl Compiled {
    pub fn metrics_report(&self, program: &str, logical: usize) -> MetricsReport {
        let m = &self.metrics;
        MetricsReport {
            format_version: FORMAT_VERSION,
            program: program.to_string(),
            highway: self.highway,
            logical_qubits: logical,
            physical_qubits: self.program.circuit.num_qubits(),
            n_on: m.n_on,
            n_cross: m.n_cross,
            n_meas: m.n_meas,
            depth: m.depth,
            eff_cnots: m.eff_cnots,
            highway_fraction: m.highway_fraction,
        }
    }

    pub fn sidecar(&self, program: &str, cfg: &Config, target: &Target) -> Sidecar {
        let backbone = if self.highway { target.layout.backbone().collect() } else { Vec::new() };
        Sidecar {
            format_version: FORMAT_VERSION,
            program: program.to_string(),
            highway: self.highway,
            config: cfg.clone(),
            initial_map: self.program.initial_map.clone(),
            final_map: self.program.final_map.clone(),
            stats: self.program.stats.clone(),
            backbone,
            shuttles: self.program.shuttles.clone(),
        }
    }
}

/// Writes the input circuit, compiled circuit, sidecar and metrics into
/// `dir`, returning the metrics report.
pub fn write_artifacts(
    dir: &Path,
    program: &str,
    cfg: &Config,
    target: &Target,
    original: &Circuit,
    compiled: &Compiled,
) -> Result<MetricsReport> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let report = compiled.metrics_report(program, original.num_qubits());
    let write = |name: &str, body: String| {
        let path = dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    };
    write(ORIGINAL_FILE, write_circuit(original))?;
    write(CIRCUIT_FILE, write_circuit(&compiled.program.circuit))?;
    write(SIDECAR_FILE, to_json(&compiled.sidecar(program, cfg, target))?)?;
    write(METRICS_FILE, to_json(&report)?)?;
    Ok(report)
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_circuit(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

pub struct VerifyOptions {
    pub trials: usize,
    pub branches: usize,
    pub seed: u64,
}

/// Checks compiled artifacts in `dir` against their input circuit.
pub fn verify_dir(dir: &Path, opts: &VerifyOptions) -> Result<VerifyReport> {
    let original = read_circuit(&dir.join(ORIGINAL_FILE))?;
    let compiled = read_circuit(&dir.join(CIRCUIT_FILE))?;
    let path = dir.join(SIDECAR_FILE);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let side: Sidecar = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let map = QubitMap { input: side.initial_map, output: side.final_map };
    Ok(verify(&original, &compiled, &map, opts.trials, opts.branches, opts.seed)?)
}
