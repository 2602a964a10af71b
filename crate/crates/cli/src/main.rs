//! `critchain` command-line interface.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use critchain::ModelKind;

#[derive(Parser, Debug)]
#[command(
    name = "critchain",
    version,
    about = "Long-range critical chains on a ring and their local truncations"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit the timestamp line so identical runs give identical bytes.
    #[arg(long, global = true)]
    reproducible: bool,
    /// Memory the solver may use, in GiB.
    #[arg(long, global = true, default_value_t = 3.0)]
    memory_gib: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ChainArgs {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    n: usize,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    n: usize,
    /// exact, nn, nnn, nn-opt or nnn-opt.
    #[arg(long)]
    kind: ModelKind,
    /// Density-density scale of the optimized kinds.
    #[arg(long)]
    u: Option<f64>,
    /// Number of eigenpairs.
    #[arg(long)]
    k: Option<usize>,
    /// Residual tolerance of every eigenpair.
    #[arg(long, default_value_t = critchain::config::DEFAULT_TOL)]
    tol: f64,
    /// Seed of the Lanczos start vector (default: derived from the model).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory of cached ground states.
    #[arg(long, env = "CRITCHAIN_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ReferenceArg {
    /// Compare with reference values from PATH, or from the bundled tables when PATH is omitted or `bundled`.
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "bundled")]
    reference: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coupling coefficients by ring distance.
    Coefficients(ChainArgs),
    /// Ground-state energy, gap and overlap with the analytic state.
    Ground {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        reference: ReferenceArg,
    },
    /// Block entanglement entropy of the model and analytic ground states.
    Entropy(ModelArgs),
    /// Density correlation g2(d) of the model and analytic ground states.
    G2(ModelArgs),
    /// Lowest levels, raw and normalized.
    Spectrum(ModelArgs),
    /// Overlaps of low-lying eigenstates with those of the exact model.
    Excited {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        reference: ReferenceArg,
    },
    /// Density-density scale maximizing the ground-state overlap.
    OptimizeU {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        reference: ReferenceArg,
        /// Search interval `LO,HI`.
        #[arg(long, value_parser = commands::parse_bracket, default_value = "0.1,8.0")]
        bracket: (f64, f64),
        /// Spacing of the coarse grid.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Final width of the refined interval.
        #[arg(long, default_value_t = 1e-3)]
        u_tol: f64,
    },
    /// Writes the analytic state as a cache file.
    AnalyticState {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        /// Target file (default: the standard name inside the cache directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "CRITCHAIN_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
