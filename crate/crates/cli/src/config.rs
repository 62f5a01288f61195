//! Run configuration, read from TOML.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mech::highway::HighwayConfig;
use mech::metrics::{ErrorModel, Weight};
use mech::scheduler::SchedulerConfig;
use mech::topology::{ChipletSpec, Ratio, Structure};

/// Keys every config file must set.
pub const REQUIRED_KEYS: &[&str] = &[
    "seed",
    "topology.structure",
    "topology.chiplet_rows",
    "topology.chiplet_cols",
    "topology.array_rows",
    "topology.array_cols",
    "topology.cross_sparsity",
    "highway.periods",
    "highway.density_multiplier",
    "highway.interleave",
    "highway.min_targets",
    "error_model.ratio_cross",
    "error_model.ratio_meas",
    "error_model.meas_depth",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    #[serde(default = "default_vqe_layers")]
    pub vqe_layers: usize,
    pub topology: TopologySection,
    pub highway: HighwaySection,
    pub error_model: ErrorModelSection,
}

fn default_vqe_layers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub structure: Structure,
    pub chiplet_rows: usize,
    pub chiplet_cols: usize,
    pub array_rows: usize,
    pub array_cols: usize,
    pub cross_sparsity: Ratio,
}

/// Highway line spacing: one line per chiplet, or explicit `[rows, cols]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Periods {
    Named(PeriodName),
    Explicit([usize; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodName {
    Chiplet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighwaySection {
    pub periods: Periods,
    pub density_multiplier: usize,
    pub interleave: bool,
    pub min_targets: usize,
    #[serde(default = "default_cross_cost")]
    pub cross_chip_swap_cost: usize,
}

fn default_cross_cost() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModelSection {
    pub ratio_cross: Weight,
    pub ratio_meas: Weight,
    pub meas_depth: f64,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Config> {
        let table: toml::Table = toml::from_str(text)?;
        for key in REQUIRED_KEYS {
            if lookup(&table, key).is_none() {
                bail!("missing config key `{key}`");
            }
        }
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        for (key, v) in [
            ("topology.chiplet_rows", t.chiplet_rows),
            ("topology.chiplet_cols", t.chiplet_cols),
            ("topology.array_rows", t.array_rows),
            ("topology.array_cols", t.array_cols),
            ("highway.density_multiplier", self.highway.density_multiplier),
            ("highway.min_targets", self.highway.min_targets),
            ("highway.cross_chip_swap_cost", self.highway.cross_chip_swap_cost),
        ] {
            if v == 0 {
                bail!("config key `{key}` must be at least 1");
            }
        }
        if let Periods::Explicit([r, c]) = self.highway.periods {
            if r == 0 || c == 0 {
                bail!("config key `highway.periods` must be positive");
            }
        }
        if let Err(e) = self.error_model().validate() {
            bail!("config section `error_model`: {e}");
        }
        if !(self.error_model.meas_depth.is_finite() && self.error_model.meas_depth >= 0.0) {
            bail!("config key `error_model.meas_depth` must be a non-negative number");
        }
        Ok(())
    }

    pub fn chiplet_spec(&self) -> ChipletSpec {
        let t = &self.topology;
        ChipletSpec {
            structure: t.structure,
            chiplet_rows: t.chiplet_rows,
            chiplet_cols: t.chiplet_cols,
            array_rows: t.array_rows,
            array_cols: t.array_cols,
            cross_sparsity: t.cross_sparsity,
        }
    }

    pub fn highway_config(&self) -> HighwayConfig {
        let (rows, cols) = match self.highway.periods {
            Periods::Named(PeriodName::Chiplet) => (None, None),
            Periods::Explicit([r, c]) => (Some(r), Some(c)),
        };
        HighwayConfig {
            mesh_period_rows: rows,
            mesh_period_cols: cols,
            density_multiplier: self.highway.density_multiplier,
            interleave: self.highway.interleave,
            ..HighwayConfig::default()
        }
    }

    pub fn scheduler_config(&self) -> SchedulerConfig {
        SchedulerConfig {
            min_targets: self.highway.min_targets,
            meas_depth: self.error_model.meas_depth,
            cross_chip_swap_cost: self.highway.cross_chip_swap_cost,
        }
    }

    pub fn error_model(&self) -> ErrorModel {
        ErrorModel {
            ratio_cross: self.error_model.ratio_cross,
            ratio_meas: self.error_model.ratio_meas,
            meas_depth: self.error_model.meas_depth,
        }
    }

    /// Square `n`x`n` chiplets in an `rows`x`cols` array with the default
    /// highway and error model.
    pub fn square(n: usize, rows: usize, cols: usize) -> Config {
        let model = ErrorModel::default();
        Config {
            seed: 0,
            vqe_layers: 1,
            topology: TopologySection {
                structure: Structure::Square,
                chiplet_rows: n,
                chiplet_cols: n,
                array_rows: rows,
                array_cols: cols,
                cross_sparsity: Ratio::ONE,
            },
            highway: HighwaySection {
                periods: Periods::Named(PeriodName::Chiplet),
                density_multiplier: 1,
                interleave: true,
                min_targets: 2,
                cross_chip_swap_cost: 1,
            },
            error_model: ErrorModelSection {
                ratio_cross: model.ratio_cross,
                ratio_meas: model.ratio_meas,
                meas_depth: model.meas_depth,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn lookup<'a>(table: &'a toml::Table, dotted: &str) -> Option<&'a toml::Value> {
    let mut parts = dotted.split('.');
    let mut v = table.get(parts.next()?)?;
    for p in parts {
        v = v.as_table()?.get(p)?;
    }
    Some(v)
}
