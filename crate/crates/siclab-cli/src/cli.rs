//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use siclab::security::KeyMode;

#[derive(Parser, Debug)]
#[command(
    name = "siclab",
    version,
    about = "Identifying-complexity bounds and security verdicts for encrypted control loops",
    after_help = "The identifying-complexity bound is undefined for zero process noise \
                  (--sigma-w2 0 is rejected wherever gamma is computed)."
)]
pub struct Cli {
    /// Master seed for randomized commands (flag beats the environment)
    #[arg(long, global = true, env = "SICLAB_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Output format for tabular results
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write data to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Plant source: a plant JSON file, or "paper" for the built-in
    /// reference plant
    #[arg(long, global = true)]
    pub plant: Option<String>,

    /// Print the resolved plant as JSON and exit (no subcommand)
    #[arg(long, global = true)]
    pub dump_plant: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the bound gamma(N) for one or more sample counts
    Gamma(GammaArgs),
    /// Decide the security predicate; exit 0 if secure, 3 if not
    Secure(SecureArgs),
    /// Monte Carlo identification with the bound alongside
    Identify(IdentifyArgs),
    /// Run a sweep experiment and write CSV files plus a JSON sidecar
    Sweep(SweepArgs),
    /// Minimal security parameter meeting a requirement
    Design(DesignArgs),
    /// Run any subcommand on the closed loop A + B F
    ClosedLoop(ClosedLoopArgs),
}

#[derive(Args, Debug)]
pub struct GammaArgs {
    /// Process-noise variance per coordinate
    #[arg(long = "sigma-w2")]
    pub sigma_w2: f64,

    /// Probing-input variance per coordinate
    #[arg(long = "sigma-u2")]
    pub sigma_u2: f64,

    /// Single sample count N
    #[arg(long)]
    pub n: Option<u64>,

    /// Sample-count grid: comma-separated values and/or start..end..step
    /// ranges, e.g. "200..2000..200" or "101,1001"
    #[arg(long = "n-grid")]
    pub n_grid: Option<String>,

    /// Also print the large-j form of the bound
    #[arg(long)]
    pub approx: bool,

    /// Include Gramian traces, variance ratio and spectral radius
    #[arg(long)]
    pub explain: bool,
}

#[derive(Args, Debug)]
pub struct SecureArgs {
    /// Acceptable estimation error gamma_c
    #[arg(long = "gamma-c")]
    pub gamma_c: f64,

    /// Plant life span tau_c in seconds
    #[arg(long = "tau-c")]
    pub tau_c: f64,

    /// Adversary compute budget in FLOPS
    #[arg(long)]
    pub flops: f64,

    /// Security parameter in bits
    #[arg(long)]
    pub lambda: u32,

    /// Key handling of the encryption scheme
    #[arg(long = "key-mode", default_value = "dynamic")]
    pub key_mode: KeyMode,

    /// Process-noise variance per coordinate
    #[arg(long = "sigma-w2", default_value_t = 1.0)]
    pub sigma_w2: f64,

    /// Probing-input variance per coordinate
    #[arg(long = "sigma-u2", default_value_t = 1.0)]
    pub sigma_u2: f64,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    /// Process-noise variance per coordinate
    #[arg(long = "sigma-w2")]
    pub sigma_w2: f64,

    /// Probing-input variance per coordinate
    #[arg(long = "sigma-u2")]
    pub sigma_u2: f64,

    /// Sample count N per trial
    #[arg(long)]
    pub n: u64,

    /// Number of Monte Carlo trials
    #[arg(long, default_value_t = 50)]
    pub trials: usize,

    /// Write the first trial's trajectory as CSV to this path
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    ErrorSweep,
    VarianceGrid,
    GramianSweep,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Which study to run
    #[arg(value_enum)]
    pub kind: SweepKind,

    /// Sample-count grid override (error-sweep, variance-grid)
    #[arg(long = "n-grid")]
    pub n_grid: Option<String>,

    /// Regression-length grid override (gramian-sweep)
    #[arg(long = "j-grid")]
    pub j_grid: Option<String>,

    /// Trials per cell override
    #[arg(long)]
    pub trials: Option<usize>,

    /// Process-noise variance set, comma separated
    #[arg(long = "sigma-w2-set")]
    pub sigma_w2_set: Option<String>,

    /// Probing-input variance set, comma separated
    #[arg(long = "sigma-u2-set")]
    pub sigma_u2_set: Option<String>,

    /// Ladder size for variance-grid and gramian-sweep
    #[arg(long, default_value_t = 20)]
    pub plants: usize,

    /// Directory receiving the CSV and metadata files
    #[arg(long = "out-dir", default_value = "sweep-out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// Acceptable estimation error gamma_c
    #[arg(long = "gamma-c")]
    pub gamma_c: f64,

    /// Plant life span tau_c in seconds
    #[arg(long = "tau-c")]
    pub tau_c: f64,

    /// Adversary compute budget in FLOPS
    #[arg(long)]
    pub flops: f64,

    /// Key handling of the encryption scheme
    #[arg(long = "key-mode", default_value = "dynamic")]
    pub key_mode: KeyMode,

    /// Process-noise variance per coordinate
    #[arg(long = "sigma-w2", default_value_t = 1.0)]
    pub sigma_w2: f64,

    /// Probing-input variance per coordinate
    #[arg(long = "sigma-u2", default_value_t = 1.0)]
    pub sigma_u2: f64,
}

#[derive(Args, Debug)]
pub struct ClosedLoopArgs {
    /// State-feedback gain file: {"F": [[..], ..]}
    #[arg(long = "gain-file")]
    pub gain_file: PathBuf,

    #[command(subcommand)]
    pub command: LoopCommand,
}

/// Subcommands available behind `closed-loop`.
#[derive(Subcommand, Debug)]
pub enum LoopCommand {
    Gamma(GammaArgs),
    Secure(SecureArgs),
    Identify(IdentifyArgs),
    Sweep(SweepArgs),
    Design(DesignArgs),
}
