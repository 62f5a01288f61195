use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use mech::sim::VerifyStatus;
use mech_cli::pipeline::{self, compile_on, read_circuit, to_json, BenchSpec, Target, VerifyOptions};
use mech_cli::sweep::{self, Axis};
use mech_cli::{Config, WORKERS_ENV};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Parser)]
#[command(name = "mech", version, about = "Chiplet quantum compiler with a communication highway")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a circuit file or a generated benchmark.
    Compile {
        #[arg(long)]
        config: PathBuf,
        /// Circuit in the mech text format.
        #[arg(long, conflicts_with = "bench", required_unless_present = "bench")]
        circuit: Option<PathBuf>,
        /// Benchmark such as `qft-261`, or `qft` to fill every data qubit.
        #[arg(long)]
        bench: Option<BenchSpec>,
        /// Compile without a highway using the local router only.
        #[arg(long)]
        no_highway: bool,
        /// Artifact directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check compiled artifacts against their input circuit.
    Verify {
        /// Directory written by `compile`.
        dir: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        branches: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare highway and baseline compilations along one parameter axis.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: Axis,
        /// Comma separated points, e.g. `7/7,3/7,1/7` or `2x2,2x3`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long)]
        bench: BenchSpec,
        /// CSV output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile several benchmarks on one config, highway and baseline.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "qft,qaoa,vqe,bv")]
        benches: Vec<BenchSpec>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = init_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn init_workers() -> Result<()> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v.parse().with_context(|| format!("{WORKERS_ENV}=`{v}` is not a count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Compile { config, circuit, bench, no_highway, out } => {
            let cfg = Config::load(&config)?;
            let target = Target::build(&cfg)?;
            let (name, original) = match (circuit, bench) {
                (Some(path), _) => (file_stem(&path), read_circuit(&path)?),
                (None, Some(b)) => {
                    let b = b.resolve(&target);
                    (b.to_string(), b.generate(cfg.seed, cfg.vqe_layers))
                }
                (None, None) => unreachable!("clap requires one input"),
            };
            let compiled = compile_on(&cfg, &target, &original, !no_highway)?;
            let report = pipeline::write_artifacts(&out, &name, &cfg, &target, &original, &compiled)?;
            print!("{}", to_json(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { dir, trials, branches, seed } => {
            let report = pipeline::verify_dir(&dir, &VerifyOptions { trials, branches, seed })?;
            print!("{}", to_json(&report)?);
            Ok(match report.status {
                VerifyStatus::Fail => ExitCode::from(EXIT_VERIFY),
                VerifyStatus::Pass | VerifyStatus::Unverifiable(_) => ExitCode::SUCCESS,
            })
        }
        Command::Sweep { config, axis, values, bench, out } => {
            let cfg = Config::load(&config)?;
            let rows = sweep::run_sweep(&cfg, axis, &values, bench)?;
            emit(out.as_deref(), &sweep::to_csv(&rows)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { config, benches, out } => {
            let cfg = Config::load(&config)?;
            let rows = sweep::run_bench(&cfg, &benches)?;
            emit(out.as_deref(), &sweep::to_csv(&rows)?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(body.as_bytes())?),
    }
}
