use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use su2wahba_bench::config::threads_from_env;
use su2wahba_bench::emit::{csv_string, emit_results, json_string};
use su2wahba_bench::{run_experiment, Emit, ExperimentConfig, SolverId, WeightMode};

/// Synthetic accuracy and timing benchmark for rotation solvers.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[arg(long, value_enum)]
    solver: SolverId,
    /// Points per trial.
    #[arg(long)]
    n: usize,
    /// Per-component standard deviation of the target noise.
    #[arg(long)]
    noise: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    weights: WeightMode,
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
    /// Output path stem; `.csv` / `.json` are appended. Without it the
    /// output goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record per-trial solver runtime.
    #[arg(long)]
    timing: bool,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_TRIAL_ERRORS: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = ExperimentConfig {
        solver: cli.solver,
        n: cli.n,
        noise_sigma: cli.noise,
        trials: cli.trials,
        seed: cli.seed,
        weight_mode: cli.weights,
        emit: cli.emit,
        timing: cli.timing,
    };
    let threads = match cfg.validate().and_then(|_| threads_from_env()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("bench: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let exp = run_experiment(&cfg, threads);
    match &cli.out {
        Some(stem) => match emit_results(&exp.summary, &exp.results, stem, cfg.emit) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("bench: {e}");
                return ExitCode::FAILURE;
            }
        },
        None => {
            if cfg.emit.csv() {
                print!("{}", csv_string(&exp.results, cfg.timing));
            }
            if cfg.emit.json() {
                print!("{}", json_string(&exp.summary));
            }
        }
    }
    let s = &exp.summary;
    eprintln!(
        "{:?} n={} sigma={} trials={} median={:.6e} deg errors={}",
        cfg.solver, cfg.n, cfg.noise_sigma, s.trials, s.median_theta_err_deg, s.errors
    );
    if s.errors * 100 > s.trials {
        return ExitCode::from(EXIT_TRIAL_ERRORS);
    }
    ExitCode::SUCCESS
}
