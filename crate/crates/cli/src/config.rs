use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use cpmaps::{Seed, Tolerances};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Trace-preserving channels sliced from Haar isometries.
    Tp,
    /// Convex combinations of unitary conjugations.
    MixedUnitary,
    /// Schur channels of random correlation matrices.
    Schur,
    /// Birkhoff mixtures of permutation matrices.
    Ds,
    /// Haar unitaries (`gen` only).
    Haar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Verify,
    Schur,
    Ds,
    Algebra,
    Gen,
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArgs {
    /// Relative singular-value cutoff for rank decisions [default: max(rows, cols) * eps]
    #[arg(long)]
    pub tol_rank: Option<f64>,
    /// Absolute threshold for equalities
    #[arg(long)]
    pub tol_eq: Option<f64>,
    /// Relative negativity allowance for PSD checks
    #[arg(long)]
    pub tol_psd: Option<f64>,
}

impl ToleranceArgs {
    pub fn resolve(&self) -> Result<Tolerances> {
        let mut tol = Tolerances {
            tol_rank: self.tol_rank,
            ..Tolerances::default()
        };
        if let Some(v) = self.tol_eq {
            tol.tol_eq = v;
        }
        if let Some(v) = self.tol_psd {
            tol.tol_psd = v;
        }
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DimArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub n: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub m: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub p: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub k: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub r: Option<u32>,
}

/// Dimensions with defaults filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub k: usize,
    pub r: usize,
}

impl DimArgs {
    pub fn resolve(&self) -> Result<Dims> {
        let get = |v: Option<u32>| v.map(|x| x as usize);
        let n = get(self.n).unwrap_or(3);
        let m = get(self.m).unwrap_or(n);
        let p = get(self.p).unwrap_or_else(|| n.div_ceil(m).max(2));
        let k = get(self.k).unwrap_or(3);
        let r = get(self.r).unwrap_or(n.min(2));
        if r > n {
            bail!("--r {r} exceeds --n {n}");
        }
        Ok(Dims { n, m, p, k, r })
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub trials: usize,
    pub seed: Seed,
    pub dims: Dims,
    pub ensemble: Option<Ensemble>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("--trials must be at least 1");
        }
        Ok(())
    }

    pub fn read_input(&self) -> Result<Option<Input>> {
        let Some(path) = &self.input_path else {
            return Ok(None);
        };
        let bytes = std::fs::read(path)
            .with_context(|| format!("cannot read input file {}", path.display()))?;
        let text = String::from_utf8(bytes.clone())
            .with_context(|| format!("{} is not UTF-8", path.display()))?;
        Ok(Some(Input {
            digest: digest(&bytes),
            text,
        }))
    }
}

pub struct Input {
    pub text: String,
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}
