use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod format;
mod manifest;

use commands::{CliError, CommandKind};
use config::{parse_grid, parse_realizations, read_file, resolve_seed, Settings, SEED_ENV};

/// Gate-level quantum sawtooth map experiments: entanglement generation,
/// spectrum widths, noise sweeps, stability thresholds and fidelity decay.
#[derive(Parser, Debug)]
#[command(name = "entforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean balanced entanglement against time, noiseless.
    Generate(CommonArgs),
    /// Entanglement spectra of sawtooth and Haar-random states.
    Spectrum(CommonArgs),
    /// Distillable-entanglement bounds against noise strength.
    NoiseSweep(CommonArgs),
    /// Noise strength at which each bound halves.
    Threshold(CommonArgs),
    /// Fidelity decay rate γ.
    CalibrateGamma(CommonArgs),
    /// Property suite; exits nonzero on any violation.
    Validate(CommonArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Qubit counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    nq: Option<Vec<usize>>,
    /// Classical chaos parameter K.
    #[arg(long = "k-param", allow_hyphen_values = true)]
    k_param: Option<f64>,
    /// Map iterations t.
    #[arg(long)]
    steps: Option<usize>,
    /// `lo:hi:log:count`, `lo:hi:lin:count` or a comma-separated list.
    #[arg(long = "eps-grid")]
    eps_grid: Option<String>,
    /// Trajectories per noise point, or `auto`.
    #[arg(long)]
    realizations: Option<String>,
    /// Master seed (falls back to ENTFORGE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail when Monte-Carlo convergence is flagged.
    #[arg(long)]
    strict: bool,
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Haar-random reference states per qubit count.
    #[arg(long = "haar-samples")]
    haar_samples: Option<usize>,
    /// Initial momentum eigenstate n.
    #[arg(long = "initial-level", allow_hyphen_values = true)]
    initial_level: Option<i64>,
    /// Trajectory batches for standard errors.
    #[arg(long)]
    batches: Option<usize>,
    /// Re-simulate once at each interpolated threshold.
    #[arg(long)]
    refine: bool,
    /// Fraction of the noiseless value defining the threshold.
    #[arg(long)]
    fraction: Option<f64>,
    /// Permit density-matrix runs at n_q = 10.
    #[arg(long = "allow-large")]
    allow_large: bool,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        Ok(Settings {
            nq: self.nq.clone(),
            k_param: self.k_param,
            steps: self.steps,
            eps_grid: self.eps_grid.as_deref().map(parse_grid).transpose()?,
            realizations: self.realizations.as_deref().map(parse_realizations).transpose()?,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            strict: self.strict.then_some(true),
            haar_samples: self.haar_samples,
            initial_level: self.initial_level,
            batches: self.batches,
            refine: self.refine.then_some(true),
            fraction: self.fraction,
            allow_large: self.allow_large.then_some(true),
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (kind, args) = match cli.command {
        Command::Generate(a) => (CommandKind::Generate, a),
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::NoiseSweep(a) => (CommandKind::NoiseSweep, a),
        Command::Threshold(a) => (CommandKind::Threshold, a),
        Command::CalibrateGamma(a) => (CommandKind::CalibrateGamma, a),
        Command::Validate(a) => (CommandKind::Validate, a),
    };
    let file = match &args.config {
        Some(path) => Settings::from_map(&read_file(path)?)?,
        None => Settings::default(),
    };
    let (mut settings, warnings) = file.overlay(args.settings()?);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let env_seed = std::env::var(SEED_ENV).ok();
    settings.seed = Some(resolve_seed(settings.seed, env_seed.as_deref())?);
    if let Some(w) = settings.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    }
    commands::dispatch(kind, settings, warnings)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
