//! `mprs` — spatial regression from the command line.
//!
//! Subcommands: `predict` (spin interpolation of a query file), `crossval`
//! (train/validation benchmarking of mprs/ok/idw), `synth` (Whittle-Matern
//! random fields on scattered sites), `bench` (prediction-time scaling on
//! surrogate data).
//!
//! Exit codes: 0 success, 2 usage or malformed input, 3 model error,
//! 4 numerical failure.

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ModelFlags;

#[derive(Parser)]
#[command(name = "mprs", version, about = "Spin-based spatial regression toolkit")]
struct Cli {
    /// Worker thread cap (0 = automatic); never changes results
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Config file with `key = value` lines (keys = long flag names)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolate query sites from scattered training data
    Predict {
        /// Training CSV (c1..cd,value)
        #[arg(long)]
        train: Option<PathBuf>,
        /// Query CSV (c1..cd)
        #[arg(long)]
        query: Option<PathBuf>,
        /// Output predictions CSV (c1..cd,mean,std)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional relaxation trace CSV
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Random seed
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Cross-validate an interpolation method over random splits
    Crossval {
        /// Data CSV (c1..cd,value)
        #[arg(long)]
        data: Option<PathBuf>,
        /// Interpolation method: mprs | ok | idw
        #[arg(long)]
        method: Option<String>,
        /// Training fraction in (0, 1)
        #[arg(long)]
        tr: Option<f64>,
        /// Number of train/validation splits
        #[arg(long)]
        splits: Option<usize>,
        /// Random seed (splits and per-split model seeds derive from it)
        #[arg(long)]
        seed: Option<u64>,
        /// Output metrics CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Covariance std dev for ok
        #[arg(long)]
        sigma: Option<f64>,
        /// Covariance smoothness for ok
        #[arg(long)]
        nu: Option<f64>,
        /// Covariance inverse correlation length for ok
        #[arg(long)]
        kappa: Option<f64>,
        /// Inverse-distance power for idw
        #[arg(long)]
        power: Option<f64>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Generate a random field with Whittle-Matern covariance
    Synth {
        /// Number of scattered sites
        #[arg(long)]
        n: Option<usize>,
        /// Domain edge length (sites are uniform in [0, L]^dim)
        #[arg(long = "L")]
        l: Option<f64>,
        /// Spatial dimension
        #[arg(long)]
        dim: Option<usize>,
        /// Inverse correlation length
        #[arg(long)]
        kappa: Option<f64>,
        /// Smoothness
        #[arg(long)]
        nu: Option<f64>,
        /// Field standard deviation (log-field std dev with --lognormal)
        #[arg(long)]
        sigma: Option<f64>,
        /// Field mean (log-field mean with --lognormal)
        #[arg(long)]
        mean: Option<f64>,
        /// Exponentiate the Gaussian field
        #[arg(long)]
        lognormal: bool,
        /// Random seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV (c1..cd,value)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time predictions on surrogate data of increasing size
    Bench {
        /// Sizes, e.g. `2^10..2^18` or `1024,4096,16384`
        #[arg(long)]
        sizes: Option<String>,
        /// Training fraction in (0, 1)
        #[arg(long)]
        tr: Option<f64>,
        /// Random seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV (N,P,t_cpu_s)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub(crate) use Command as CliCommand;
pub(crate) use Cli as CliArgs;
