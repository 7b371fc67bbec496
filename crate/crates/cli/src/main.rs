use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gass_cvar::benchmarks::{l0_min_cvar_oracle, BenchmarkId, BenchmarkSpec};
use gass_cvar::harness::{emit_csv, Algorithm, emit_reference_run, load_config, run_experiment, ExperimentConfig, RunOptions};
use gass_cvar::{Error, LossModel};

/// Gradient-based adaptive stochastic search for CVaR minimisation.
#[derive(Parser)]
#[command(name = "gass-cvar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Replace the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the config's algorithm (gass_cvar or gass_cvar_arl).
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    /// Replace the config's replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Directory for cached reference optima.
    #[arg(long)]
    reference_cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of an experiment and write CSV output.
    Run {
        config: PathBuf,
        /// Output directory for the CSV files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a benchmark's mean loss, noise scale and exact CVaR at a point.
    Benchmark {
        id: BenchmarkId,
        #[arg(required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 0.99)]
        alpha: f64,
    },
    /// Print an analytic optimum.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
    /// Build (or read from cache) the reference optimum for a config.
    Reference {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Minimiser and minimum CVaR of the l_0 benchmark.
    L0 {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        dim: usize,
    },
}

/// Failure classes mapped onto the process exit code.
enum Failure {
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e)
        } else {
            Failure::Runtime(e)
        }
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    match s {
        "gass_cvar" => Ok(Algorithm::GassCvar),
        "gass_cvar_arl" => Ok(Algorithm::GassCvarArl),
        other => Err(format!("unknown algorithm `{other}`")),
    }
}

fn configure(path: &Path, o: &Overrides) -> Result<(ExperimentConfig, RunOptions), Failure> {
    let mut config = load_config(path).map_err(Failure::Config)?;
    if let Some(seed) = o.seed {
        config.master_seed = seed;
    }
    if let Some(a) = o.algorithm {
        config.algorithm = a;
    }
    if let Some(r) = o.replications {
        config.replications = r;
    }
    config.validate().map_err(Failure::Config)?;
    let options = RunOptions {
        workers: o.workers,
        reference_cache: o.reference_cache.clone(),
    };
    Ok((config, options))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, out, overrides } => {
            let (config, options) = configure(&config, &overrides)?;
            let summary = run_experiment(&config, &options)?;
            emit_csv(&summary, &out)?;
            let hits = summary.replications.iter().filter(|d| d.evals_to_target.is_some()).count();
            println!(
                "{} on {} (D={}): reference {}, {hits}/{} replications reached the target; output in {}",
                config.algorithm,
                config.benchmark,
                config.dimension,
                summary.reference_value,
                config.replications,
                out.display()
            );
        }
        Command::Benchmark { id, x, alpha } => {
            let spec = BenchmarkSpec::new(id, x.len()).map_err(Failure::Config)?;
            let mean = spec.deterministic_loss(&x).map_err(Failure::Config)?;
            let scale = spec.noise_scale(&x).map_err(Failure::Config)?;
            let cvar = spec
                .cvar_oracle(&x, alpha)
                .ok_or_else(|| Failure::Config(Error::InvalidParameter(format!("risk level {alpha}"))))?;
            println!("loss {mean}\nnoise_scale {scale}\ncvar {cvar}");
        }
        Command::Oracle {
            which: Oracle::L0 { alpha, dim },
        } => {
            let (x, value) = l0_min_cvar_oracle(dim, alpha).map_err(Failure::Config)?;
            println!("t {}\ncvar {value}", x[0]);
        }
        Command::Reference { config, overrides } => {
            let (config, options) = configure(&config, &overrides)?;
            println!("{}", emit_reference_run(&config, &options)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
