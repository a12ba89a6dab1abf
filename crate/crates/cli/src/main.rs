//! `polygate`: relax packings, evaluate and analyze granular NAND gates, and
//! evolve new ones.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure (blow-up, unstable packing, I/O), 3 relaxation non-convergence.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod artifacts;
mod commands;
mod config;

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "polygate", version, about = "Evolve and analyze granular materials that compute NAND")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON config; only keys that differ from the defaults are needed.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Artifact directory [default: <out-root>/<command>].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Root for default artifact directories.
    #[arg(long, env = "POLYGATE_OUT", default_value = "runs")]
    pub out_root: PathBuf,
    /// Replace results in a non-empty artifact directory.
    #[arg(long)]
    pub overwrite: bool,
    /// Worker threads for parallel evaluation [default: all cores].
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Common {
    pub fn out_dir(&self, command: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| self.out_root.join(command))
    }
}

#[derive(Args, Debug, Clone)]
pub struct DesignArg {
    /// Material design JSON (e.g. best_design.json from `evolve`),
    /// overriding `design.file` in the config.
    #[arg(long)]
    pub design: Option<PathBuf>,
}

fn parse_bits(s: &str) -> Result<[u8; 2], String> {
    match s {
        "00" => Ok([0, 0]),
        "01" => Ok([0, 1]),
        "10" => Ok([1, 0]),
        "11" => Ok([1, 1]),
        _ => Err(format!("expected one of 00, 01, 10, 11, got {s:?}")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the triangular lattice and relax it to mechanical equilibrium.
    Relax {
        #[command(flatten)]
        common: Common,
        /// Residual force tolerance, overriding `fire.force_tol`.
        #[arg(long)]
        force_tol: Option<f64>,
    },
    /// Normal-mode frequencies of a design.
    Modes {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArg,
    },
    /// Run the four truth-table cases and report gains, fitness and NAND-ness.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArg,
        /// Drive frequency, overriding the config.
        #[arg(long)]
        frequency: Option<f64>,
        /// Input case whose spectrum and time response are exported.
        #[arg(long, value_parser = parse_bits, default_value = "11")]
        bits: [u8; 2],
        /// Write one displacement CSV per truth-table case.
        #[arg(long)]
        emit_trajectories: bool,
    },
    /// NAND-ness across a frequency range.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArg,
    },
    /// Per-particle NAND-ness at two frequencies, drawn over the lattice.
    Heatmap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArg,
    },
    /// Gate quality under Gaussian noise on the input drives.
    Noise {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArg,
    },
    /// Evolve a NAND gate at one frequency.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: commands::RunArgs,
    },
    /// Evolve a gate computing NAND at two frequencies at once.
    EvolvePoly {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: commands::RunArgs,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use polygate_core::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<E>() {
        Some(E::NonConvergence { .. }) => 3,
        Some(E::InvalidInput(_) | E::LengthMismatch(..)) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let workers = match &cli.command {
        Command::Relax { common, .. }
        | Command::Modes { common, .. }
        | Command::Evaluate { common, .. }
        | Command::Sweep { common, .. }
        | Command::Heatmap { common, .. }
        | Command::Noise { common, .. }
        | Command::Evolve { common, .. }
        | Command::EvolvePoly { common, .. } => common.workers,
    };
    if let Some(n) = workers {
        if n == 0 {
            return Err(UsageError("--workers must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Relax { common, force_tol } => commands::relax(&common, force_tol),
        Command::Modes { common, design } => commands::modes(&common, &design),
        Command::Evaluate {
            common,
            design,
            frequency,
            bits,
            emit_trajectories,
        } => commands::evaluate(&common, &design, frequency, bits, emit_trajectories),
        Command::Sweep { common, design } => commands::sweep(&common, &design),
        Command::Heatmap { common, design } => commands::heatmap(&common, &design),
        Command::Noise { common, design } => commands::noise(&common, &design),
        Command::Evolve { common, run } => commands::evolve(&common, &run, false),
        Command::EvolvePoly { common, run } => commands::evolve(&common, &run, true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.exit_code() == 0 { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
