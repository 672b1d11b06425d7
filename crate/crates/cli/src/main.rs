//! `cpmaps`: analysis reports and ensemble verification for completely positive maps.
//!
//! Exit codes: 0 when every check passes, 1 on input or configuration
//! errors, 2 when a computed quantity violates one of the checked bounds.

mod analysis;
mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpmaps::Seed;

use config::{Command, DimArgs, Ensemble, RunConfig, ToleranceArgs};
use report::Status;

#[derive(Debug, Parser)]
#[command(name = "cpmaps", version, about = "Rank, norm and algebra analysis of completely positive maps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Root seed; every random draw derives from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tol: ToleranceArgs,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Uncertainty report, classification and derived checks for a channel file
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Also compute operator system, multiplicative domain and fixed-point dimensions
        #[arg(long)]
        algebra: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a seeded random ensemble and check every applicable invariant
    Verify {
        #[arg(long, value_enum)]
        ensemble: Ensemble,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Schur channel analysis of a correlation matrix (file, or drawn from --n/--r/--seed)
    Schur {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Support and rank of a doubly stochastic matrix, or of the D matrix of a unital channel
    Ds {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Operator algebras attached to a channel file
    Algebra {
        #[arg(long)]
        input: PathBuf,
        /// Include orthonormal bases of the computed subspaces
        #[arg(long)]
        basis: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Emit a random object in the standard JSON formats
    Gen {
        #[arg(long, value_enum)]
        ensemble: Ensemble,
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        common: Common,
    },
}

fn config(
    command: Command,
    input: Option<PathBuf>,
    common: &Common,
    dims: Option<&DimArgs>,
    trials: usize,
    ensemble: Option<Ensemble>,
) -> anyhow::Result<RunConfig> {
    let dims = match dims {
        Some(d) => d.resolve()?,
        None => DimArgs { n: None, m: None, p: None, k: None, r: None }.resolve()?,
    };
    let cfg = RunConfig {
        command,
        input_path: input,
        output_path: common.output.clone(),
        tolerances: common.tol.resolve()?,
        trials,
        seed: Seed(common.seed),
        dims,
        ensemble,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Cmd::Analyze { input, algebra, common } => {
            let cfg = config(Command::Analyze, Some(input), &common, None, 1, None)?;
            commands::analyze(&cfg, algebra)
        }
        Cmd::Verify { ensemble, trials, dims, common } => {
            let cfg = config(Command::Verify, None, &common, Some(&dims), trials, Some(ensemble))?;
            commands::verify(&cfg)
        }
        Cmd::Schur { input, dims, common } => {
            let cfg = config(Command::Schur, input, &common, Some(&dims), 1, None)?;
            commands::schur(&cfg)
        }
        Cmd::Ds { input, dims, common } => {
            let cfg = config(Command::Ds, input, &common, Some(&dims), 1, None)?;
            commands::ds(&cfg)
        }
        Cmd::Algebra { input, basis, common } => {
            let cfg = config(Command::Algebra, Some(input), &common, None, 1, None)?;
            commands::algebra(&cfg, basis)
        }
        Cmd::Gen { ensemble, dims, common } => {
            let cfg = config(Command::Gen, None, &common, Some(&dims), 1, Some(ensemble))?;
            commands::gen(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation) => {
            eprintln!("check failed: see the report for the violated invariants");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
