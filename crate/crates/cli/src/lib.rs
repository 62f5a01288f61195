//! Batch front-end for the mech compiler: config loading, compile and
//! verify pipelines, and parameter sweeps.

pub mod config;
pub mod pipeline;
pub mod sweep;

pub use config::Config;
pub use pipeline::{BenchSpec, Compiled};
pub use sweep::{Axis, SweepRow};

/// Version tag written into every JSON and CSV artifact.
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable holding the worker count for sweeps and benches.
pub const WORKERS_ENV: &str = "MECH_WORKERS";
