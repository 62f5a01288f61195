//! Parameter sweeps comparing the highway compiler with the baseline.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use mech::metrics::{Metrics, Weight};
use mech::topology::{Ratio, Structure};

use crate::pipeline::{compile_on, remeasure, BenchSpec, Compiled, Target};
use crate::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Array dimensions written `RxC`.
    ChipletCount,
    Sparsity,
    MeasDepth,
    RatioMeas,
    RatioCross,
    /// Highway density multiplier.
    HighwayPct,
    Structure,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::ChipletCount,
        Axis::Sparsity,
        Axis::MeasDepth,
        Axis::RatioMeas,
        Axis::RatioCross,
        Axis::HighwayPct,
        Axis::Structure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::ChipletCount => "chiplet_count",
            Axis::Sparsity => "sparsity",
            Axis::MeasDepth => "meas_depth",
            Axis::RatioMeas => "ratio_meas",
            Axis::RatioCross => "ratio_cross",
            Axis::HighwayPct => "highway_pct",
            Axis::Structure => "structure",
        }
    }

    /// Axes that only change the error model, so one compilation serves
    /// every point.
    pub fn model_only(self) -> bool {
        matches!(self, Axis::MeasDepth | Axis::RatioMeas | Axis::RatioCross)
    }

    /// `cfg` with this axis set to `value`.
    pub fn apply(self, cfg: &Config, value: &str) -> Result<Config> {
        let mut c = cfg.clone();
        let bad = |what: &str| anyhow!("bad {} value `{value}`: {what}", self.name());
        match self {
            Axis::ChipletCount => {
                let (r, k) = value.split_once(['x', 'X']).ok_or_else(|| bad("expected RxC"))?;
                c.topology.array_rows = r.trim().parse().map_err(|_| bad("rows"))?;
                c.topology.array_cols = k.trim().parse().map_err(|_| bad("cols"))?;
            }
            Axis::Sparsity => c.topology.cross_sparsity = value.parse::<Ratio>().map_err(|e| bad(&e.to_string()))?,
            Axis::MeasDepth => c.error_model.meas_depth = value.parse().map_err(|_| bad("expected a number"))?,
            Axis::RatioMeas => c.error_model.ratio_meas = value.parse::<Weight>().map_err(|e| bad(&e.to_string()))?,
            Axis::RatioCross => c.error_model.ratio_cross = value.parse::<Weight>().map_err(|e| bad(&e.to_string()))?,
            Axis::HighwayPct => c.highway.density_multiplier = value.parse().map_err(|_| bad("expected 1, 2, ..."))?,
            Axis::Structure => c.topology.structure = value.parse::<Structure>().map_err(|e| bad(&e.to_string()))?,
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Axis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = Axis::ALL.iter().map(|a| a.name()).collect();
            format!("unknown axis `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// One sweep point. Improvements are `(baseline - mech) / baseline`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub format_version: u32,
    pub axis: String,
    pub value: String,
    pub program: String,
    pub physical_qubits: usize,
    pub highway_fraction: f64,
    pub mech_n_on: u64,
    pub mech_n_cross: u64,
    pub mech_n_meas: u64,
    pub mech_depth: f64,
    pub mech_eff_cnots: f64,
    pub base_n_on: u64,
    pub base_n_cross: u64,
    pub base_n_meas: u64,
    pub base_depth: f64,
    pub base_eff_cnots: f64,
    pub depth_improvement: f64,
    pub eff_improvement: f64,
}

impl SweepRow {
    pub fn new(axis: &str, value: &str, program: &str, physical: usize, mech: &Metrics, base: &Metrics) -> Self {
        SweepRow {
            format_version: crate::FORMAT_VERSION,
            axis: axis.to_string(),
            value: value.to_string(),
            program: program.to_string(),
            physical_qubits: physical,
            highway_fraction: mech.highway_fraction,
            mech_n_on: mech.n_on,
            mech_n_cross: mech.n_cross,
            mech_n_meas: mech.n_meas,
            mech_depth: mech.depth,
            mech_eff_cnots: mech.eff_cnots,
            base_n_on: base.n_on,
            base_n_cross: base.n_cross,
            base_n_meas: base.n_meas,
            base_depth: base.depth,
            base_eff_cnots: base.eff_cnots,
            depth_improvement: improvement(base.depth, mech.depth),
            eff_improvement: improvement(base.eff_cnots, mech.eff_cnots),
        }
    }
}

pub fn improvement(base: f64, mech: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        (base - mech) / base
    }
}

/// Highway and baseline compilations of one benchmark on one config.
pub struct Pair {
    pub target: Target,
    pub program: String,
    pub mech: Compiled,
    pub base: Compiled,
}

pub fn compile_pair(cfg: &Config, bench: BenchSpec) -> Result<Pair> {
    let target = Target::build(cfg)?;
    let b = bench.resolve(&target);
    let circuit = b.generate(cfg.seed, cfg.vqe_layers);
    let (mech, base) = rayon::join(
        || compile_on(cfg, &target, &circuit, true),
        || compile_on(cfg, &target, &circuit, false),
    );
    Ok(Pair { program: b.to_string(), mech: mech?, base: base?, target })
}

/// Runs `bench` at every value of `axis`, points in parallel, rows in input
/// order.
pub fn run_sweep(cfg: &Config, axis: Axis, values: &[String], bench: BenchSpec) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        bail!("sweep needs at least one value");
    }
    let configs = values.iter().map(|v| axis.apply(cfg, v)).collect::<Result<Vec<_>>>()?;
    if axis.model_only() {
        let pair = compile_pair(cfg, bench)?;
        return values
            .iter()
            .zip(&configs)
            .map(|(v, c)| {
                let model = c.error_model();
                let mech = remeasure(&pair.mech, &pair.target, &model)?;
                let base = remeasure(&pair.base, &pair.target, &model)?;
                Ok(SweepRow::new(axis.name(), v, &pair.program, pair.target.graph.num_nodes(), &mech, &base))
            })
            .collect();
    }
    values
        .par_iter()
        .zip(&configs)
        .map(|(v, c)| {
            let pair = compile_pair(c, bench)?;
            let n = pair.target.graph.num_nodes();
            Ok(SweepRow::new(axis.name(), v, &pair.program, n, &pair.mech.metrics, &pair.base.metrics))
        })
        .collect()
}

/// One row per benchmark on a single config.
pub fn run_bench(cfg: &Config, benches: &[BenchSpec]) -> Result<Vec<SweepRow>> {
    benches
        .par_iter()
        .map(|&b| {
            let pair = compile_pair(cfg, b)?;
            let n = pair.target.graph.num_nodes();
            Ok(SweepRow::new("none", "", &pair.program, n, &pair.mech.metrics, &pair.base.metrics))
        })
        .collect()
}

pub fn to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_round_trip() {
        for a in Axis::ALL {
            assert_eq!(a.name().parse::<Axis>().unwrap(), a);
        }
        assert!("chiplets".parse::<Axis>().is_err());
    }

    #[test]
    fn apply_sets_one_field() {
        let cfg = Config::square(7, 2, 2);
        let c = Axis::ChipletCount.apply(&cfg, "2x3").unwrap();
        assert_eq!((c.topology.array_rows, c.topology.array_cols), (2, 3));
        let c = Axis::Sparsity.apply(&cfg, "3/7").unwrap();
        assert_eq!(c.topology.cross_sparsity, Ratio::new(3, 7).unwrap());
        let c = Axis::HighwayPct.apply(&cfg, "2").unwrap();
        assert_eq!(c.highway.density_multiplier, 2);
        let c = Axis::RatioCross.apply(&cfg, "10").unwrap();
        assert_eq!(c.error_model.ratio_cross, Weight::new(10, 1).unwrap());
        assert!(Axis::MeasDepth.apply(&cfg, "x").is_err());
        assert!(Axis::HighwayPct.apply(&cfg, "0").is_err());
    }

    #[test]
    fn single_point_gives_one_row() {
        let cfg = Config::square(3, 1, 2);
        let rows = run_sweep(&cfg, Axis::Sparsity, &["1".into()], "bv-6".parse().unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].program, "bv-6");
    }

    #[test]
    fn model_only_axis_keeps_counts() {
        let cfg = Config::square(3, 1, 2);
        let vals: Vec<String> = ["1", "5"].map(String::from).to_vec();
        let rows = run_sweep(&cfg, Axis::MeasDepth, &vals, "qft-6".parse().unwrap()).unwrap();
        assert_eq!(rows[0].mech_n_on, rows[1].mech_n_on);
        assert!(rows[1].mech_depth >= rows[0].mech_depth);
    }
}
