use anyhow::{bail, Context, Result};
use cpmaps::algebra::{
    fixed_point_set, multiplicative_domain, multiplicative_domain_with, operator_system,
    unitary_part, Sides,
};
use cpmaps::channel::classify;
use cpmaps::dstoch::{
    check_doubly_stochastic, ds_rank_support_bound, ds_spectral_norm, extract_dphi, DsCheck,
    DoublyStochasticMatrix,
};
use cpmaps::gen::{
    haar_unitary, mixed_unitary_channel, random_correlation_matrix, random_ds, random_tp_channel,
};
use cpmaps::io::{
    correlation_to_json, ds_to_json, parse_channel, parse_correlation, parse_doubly_stochastic,
    ChannelJson, DecompositionJson, MatrixJson, SubspaceJson,
};
use cpmaps::schur::{matroid_circuits, MAX_MATROID_SIZE};
use cpmaps::uncertainty::channel_rank;
use cpmaps::{Channel, Seed, Tolerances};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{algebra_checks, analyze_channel, analyze_schur, AlgebraSummary, SchurAnalysis};
use crate::config::{Dims, Ensemble, RunConfig};
use crate::report::{emit, Checks, Envelope, Status};

fn finish<T: Serialize>(cfg: &RunConfig, digest: Option<String>, checks: Checks, report: T) -> Result<Status> {
    let env = Envelope::new(cfg, digest, checks, report);
    emit(cfg, &env)?;
    Ok(env.status)
}

fn required_input(cfg: &RunConfig) -> Result<crate::config::Input> {
    cfg.read_input()?.context("--input is required")
}

fn load_channel(cfg: &RunConfig) -> Result<(Channel, String)> {
    let input = required_input(cfg)?;
    let path = cfg.input_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    let ch = parse_channel(&input.text, &cfg.tolerances).with_context(|| format!("invalid channel in {path}"))?;
    Ok((ch, input.digest))
}

pub fn analyze(cfg: &RunConfig, with_algebra: bool) -> Result<Status> {
    let (ch, digest) = load_channel(cfg)?;
    let mut checks = Checks::default();
    let report = analyze_channel(&ch, &cfg.tolerances, with_algebra, &mut checks)?;
    finish(cfg, Some(digest), checks, report)
}

#[derive(Serialize)]
struct AlgebraReport {
    dims: AlgebraSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    bases: Option<AlgebraBases>,
}

#[derive(Serialize)]
struct AlgebraBases {
    operator_system: SubspaceJson,
    multiplicative_domain: Option<SubspaceJson>,
    fixed_points: Option<SubspaceJson>,
    unitary_part: Option<SubspaceJson>,
}

pub fn algebra(cfg: &RunConfig, with_basis: bool) -> Result<Status> {
    let (ch, digest) = load_channel(cfg)?;
    let tol = &cfg.tolerances;
    let class = classify(&ch, tol)?;
    let mut checks = Checks::default();
    let dims = algebra_checks(&ch, &class, tol, &mut checks)?;
    let bases = if with_basis {
        let md = if class.is_unital {
            Some(multiplicative_domain(&ch, tol)?)
        } else if ch.dim_in() == ch.dim_out() {
            Some(multiplicative_domain_with(&ch, Sides::Both, tol))
        } else {
            None
        };
        let square = ch.dim_in() == ch.dim_out();
        Some(AlgebraBases {
            operator_system: SubspaceJson::from_subspace(&operator_system(&ch, tol)?),
            multiplicative_domain: md.as_ref().map(SubspaceJson::from_subspace),
            fixed_points: if square {
                Some(SubspaceJson::from_subspace(&fixed_point_set(&ch, tol)?))
            } else {
                None
            },
            unitary_part: if class.is_trace_preserving {
                Some(SubspaceJson::from_subspace(&unitary_part(&ch, tol)?))
            } else {
                None
            },
        })
    } else {
        None
    };
    finish(cfg, Some(digest), checks, AlgebraReport { dims, bases })
}

#[derive(Serialize)]
struct SchurReport {
    correlation: MatrixJson,
    analysis: SchurAnalysis,
    decomposition: DecompositionJson,
    /// Circuits of the quotient's column matroid; absent when the quotient is too large.
    circuits: Option<Vec<Vec<usize>>>,
}

pub fn schur(cfg: &RunConfig) -> Result<Status> {
    let tol = &cfg.tolerances;
    let input = cfg.read_input()?;
    let (cm, digest) = match &input {
        Some(i) => (parse_correlation(&i.text, tol).context("invalid correlation matrix")?, Some(i.digest.clone())),
        None => (random_correlation_matrix(cfg.dims.n, cfg.dims.r, cfg.seed)?, None),
    };
    let mut checks = Checks::default();
    let (analysis, blocks) = analyze_schur(&cm, tol, &mut checks)?;
    let q = blocks.quotient.n();
    let circuits = if q <= MAX_MATROID_SIZE {
        Some(matroid_circuits(&blocks.quotient, q, tol)?)
    } else {
        None
    };
    let report = SchurReport {
        correlation: correlation_to_json(&cm),
        analysis,
        decomposition: DecompositionJson::from_decomposition(&blocks),
        circuits,
    };
    finish(cfg, digest, checks, report)
}

#[derive(Serialize)]
struct DsReport {
    source: &'static str,
    matrix: MatrixJson,
    n: usize,
    check: DsCheck,
    support: usize,
    rank: usize,
    spectral_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel_rank: Option<usize>,
}

fn ds_checks(d: &DoublyStochasticMatrix, tol: &Tolerances, checks: &mut Checks) -> (DsCheck, usize, usize, f64) {
    let check = check_doubly_stochastic(d.matrix(), tol);
    let rs = ds_rank_support_bound(d, tol);
    let norm = ds_spectral_norm(d);
    checks.add("doubly_stochastic", check.is_ds);
    checks.add("support_rank_bound", rs.holds);
    checks.add("contraction", norm <= 1.0 + tol.tol_eq);
    (check, rs.support, rs.rank, norm)
}

pub fn ds(cfg: &RunConfig) -> Result<Status> {
    let tol = &cfg.tolerances;
    let input = cfg.read_input()?;
    let mut checks = Checks::default();
    let (d, source, rank_phi, digest) = match &input {
        Some(i) => {
            let value: serde_json::Value = serde_json::from_str(&i.text).context("input is not JSON")?;
            if value.get("dim_in").is_some() {
                let ch = parse_channel(&i.text, tol).context("invalid channel")?;
                let d = extract_dphi(&ch, tol)?;
                let rank_phi = channel_rank(&ch, tol);
                (d, "channel", Some(rank_phi), Some(i.digest.clone()))
            } else {
                let d = parse_doubly_stochastic(&i.text, tol).context("invalid doubly stochastic matrix")?;
                (d, "matrix", None, Some(i.digest.clone()))
            }
        }
        None => (random_ds(cfg.dims.n, cfg.dims.k, cfg.seed)?, "generated", None, None),
    };
    let (check, support, rank, norm) = ds_checks(&d, tol, &mut checks);
    if let Some(r) = rank_phi {
        checks.add("rank_dominates_dphi_rank", r >= rank);
    }
    let report = DsReport {
        source,
        matrix: ds_to_json(&d),
        n: d.n(),
        check,
        support,
        rank,
        spectral_norm: norm,
        channel_rank: rank_phi,
    };
    finish(cfg, digest, checks, report)
}

#[derive(Serialize)]
struct FailingTrial {
    trial: usize,
    seed: Seed,
    failed: Vec<String>,
}

#[derive(Serialize)]
struct VerifySummary {
    ensemble: Ensemble,
    dims: Dims,
    trials: usize,
    passed: usize,
    violations: usize,
    /// Smallest value of the ensemble's slack quantity over all trials.
    worst_slack: f64,
    failing: Vec<FailingTrial>,
}

struct Outcome {
    slack: f64,
    failed: Vec<String>,
}

fn trial(ensemble: Ensemble, dims: &Dims, tol: &Tolerances, seed: Seed) -> Result<Outcome> {
    let mut checks = Checks::default();
    let Dims { n, m, p, k, r } = *dims;
    let slack = match ensemble {
        Ensemble::Tp => {
            let ch = random_tp_channel(n, m, p, seed)?;
            analyze_channel(&ch, tol, n == m, &mut checks)?.uncertainty.slack
        }
        Ensemble::MixedUnitary => {
            let ch = mixed_unitary_channel(n, k, seed)?;
            analyze_channel(&ch, tol, true, &mut checks)?.uncertainty.slack
        }
        Ensemble::Schur => {
            let cm = random_correlation_matrix(n, r, seed)?;
            let (a, _) = analyze_schur(&cm, tol, &mut checks)?;
            a.stats.product as f64 - (n * n) as f64
        }
        Ensemble::Ds => {
            let d = random_ds(n, k, seed)?;
            let (_, support, rank, _) = ds_checks(&d, tol, &mut checks);
            (support * rank) as f64 - (n * n) as f64
        }
        Ensemble::Haar => bail!("the haar ensemble is only available to gen"),
    };
    Ok(Outcome {
        slack,
        failed: checks.failed().into_iter().map(String::from).collect(),
    })
}

pub fn verify(cfg: &RunConfig) -> Result<Status> {
    let ensemble = cfg.ensemble.context("--ensemble is required")?;
    let dims = cfg.dims;
    match ensemble {
        Ensemble::Haar => bail!("the haar ensemble is only available to gen"),
        Ensemble::Tp if dims.m * dims.p < dims.n => {
            bail!("trace-preserving channels need m * p >= n (got m={}, p={}, n={})", dims.m, dims.p, dims.n)
        }
        _ => {}
    }
    let tol = cfg.tolerances;
    let outcomes: Vec<(usize, Seed, Outcome)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = cfg.seed.child(t as u64);
            let out = trial(ensemble, &dims, &tol, seed).unwrap_or_else(|e| Outcome {
                slack: f64::NEG_INFINITY,
                failed: vec![format!("error: {e}")],
            });
            (t, seed, out)
        })
        .collect();

    let worst_slack = outcomes.iter().map(|(_, _, o)| o.slack).fold(f64::INFINITY, f64::min);
    let failing: Vec<FailingTrial> = outcomes
        .into_iter()
        .filter(|(_, _, o)| !o.failed.is_empty())
        .map(|(trial, seed, o)| FailingTrial { trial, seed, failed: o.failed })
        .collect();
    let mut checks = Checks::default();
    checks.add("no_violations", failing.is_empty());
    let summary = VerifySummary {
        ensemble,
        dims,
        trials: cfg.trials,
        passed: cfg.trials - failing.len(),
        violations: failing.len(),
        worst_slack,
        failing,
    };
    finish(cfg, None, checks, summary)
}

/// Writes the generated object in the same format the other commands read.
pub fn gen(cfg: &RunConfig) -> Result<Status> {
    let Dims { n, m, p, k, r } = cfg.dims;
    let seed = cfg.seed;
    match cfg.ensemble.context("--ensemble is required")? {
        Ensemble::Tp => emit(cfg, &ChannelJson::from_channel(&random_tp_channel(n, m, p, seed)?))?,
        Ensemble::MixedUnitary => emit(cfg, &ChannelJson::from_channel(&mixed_unitary_channel(n, k, seed)?))?,
        Ensemble::Schur => emit(cfg, &correlation_to_json(&random_correlation_matrix(n, r, seed)?))?,
        Ensemble::Ds => emit(cfg, &ds_to_json(&random_ds(n, k, seed)?))?,
        Ensemble::Haar => emit(cfg, &MatrixJson::from_matrix(&haar_unitary(n, seed)?))?,
    }
    Ok(Status::Ok)
}
