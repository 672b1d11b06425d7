//! Invariant checks shared by `analyze`, `algebra` and `verify`.

use anyhow::Result;
use cpmaps::algebra::{
    commutant, fixed_point_set, generated_algebra, homomorphism_residuals, inclusion_chain_check,
    multiplicative_domain, multiplicative_domain_with, operator_system, subspace_eq, unitary_part,
    InclusionSummary, Sides,
};
use cpmaps::channel::{classify, ChannelClass};
use cpmaps::dstoch::{check_doubly_stochastic, ds_rank_support_bound, extract_dphi, RankSupport};
use cpmaps::io::MatrixJson;
use cpmaps::matcore::svd_rank;
use cpmaps::schur::{hadamard_rank_stats, make_schur_channel, modulus_one_blocks, CorrelationMatrix, HadamardRankStats};
use cpmaps::uncertainty::{channel_operator_norm, kraus_gram_hs_sum, uncertainty_report};
use cpmaps::{Channel, Tolerances, UncertaintyReport};
use serde::Serialize;

use crate::report::Checks;

/// Pass threshold for the norm identity `Tr(T T*) = ‖Φ^C(I)‖²`, relative to `1 + Tr(T T*)`.
pub const NORM_IDENTITY_TOLERANCE: f64 = 1e-9;
/// Pass threshold for homomorphism and subspace residuals in ensemble runs.
pub const ALGEBRA_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DsSummary {
    pub matrix: MatrixJson,
    pub support: usize,
    pub rank: usize,
    pub support_rank_holds: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AlgebraSummary {
    pub operator_system: usize,
    pub fixed_points: Option<usize>,
    pub multiplicative_domain: Option<usize>,
    pub unitary_part: Option<usize>,
    pub bicommutant: Option<usize>,
    pub inclusion_chain: Option<InclusionSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelAnalysis {
    pub dim_in: usize,
    pub dim_out: usize,
    pub num_kraus: usize,
    pub class: ChannelClass,
    pub uncertainty: UncertaintyReport,
    pub operator_norm: f64,
    pub operator_system_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubly_stochastic: Option<DsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSummary>,
}

pub fn analyze_channel(
    ch: &Channel,
    tol: &Tolerances,
    with_algebra: bool,
    checks: &mut Checks,
) -> Result<ChannelAnalysis> {
    let (n, m, p) = (ch.dim_in(), ch.dim_out(), ch.num_kraus());
    let class = classify(ch, tol)?;
    let rep = uncertainty_report(ch, tol)?;
    let system = operator_system(ch, tol)?;
    let norm = channel_operator_norm(ch);

    checks.add("rank_product_bound", rep.holds());
    checks.add("one_sided_rank_bounds", rep.one_sided_hold());
    checks.add("norm_identity", rep.norm_identity_residual() <= NORM_IDENTITY_TOLERANCE);
    checks.add("complement_rank_is_operator_system_dim", rep.rank_comp == system.dim());
    if class.is_trace_preserving {
        let floor = (n * n) as f64 / p as f64;
        checks.add("tp_complement_identity_norm", rep.hs_comp_id.powi(2) >= floor - tol.tol_eq);
    }
    if class.is_unital {
        checks.add("unital_kraus_gram_sum", kraus_gram_hs_sum(ch) <= m as f64 + tol.tol_eq);
    }

    let mut doubly_stochastic = None;
    if class.is_unital_tp() {
        checks.add("unital_tp_rank_product", rep.product >= n * n);
        checks.add("unital_tp_contraction", (norm - 1.0).abs() <= NORM_IDENTITY_TOLERANCE);
        let d = extract_dphi(ch, tol)?;
        let RankSupport { support, rank, holds } = ds_rank_support_bound(&d, tol);
        checks.add("dphi_doubly_stochastic", check_doubly_stochastic(d.matrix(), tol).is_ds);
        checks.add("rank_dominates_dphi_rank", rep.rank_phi >= rank);
        checks.add("dphi_support_rank_bound", holds);
        doubly_stochastic = Some(DsSummary {
            matrix: MatrixJson::from_real(d.matrix()),
            support,
            rank,
            support_rank_holds: holds,
        });
    }

    let algebra = if with_algebra {
        Some(algebra_checks(ch, &class, tol, checks)?)
    } else {
        None
    };

    Ok(ChannelAnalysis {
        dim_in: n,
        dim_out: m,
        num_kraus: p,
        class,
        uncertainty: rep,
        operator_norm: norm,
        operator_system_dim: system.dim(),
        doubly_stochastic,
        algebra,
    })
}

pub fn algebra_checks(
    ch: &Channel,
    class: &ChannelClass,
    tol: &Tolerances,
    checks: &mut Checks,
) -> Result<AlgebraSummary> {
    let loose = Tolerances {
        tol_eq: ALGEBRA_TOLERANCE,
        ..*tol
    };
    let system = operator_system(ch, tol)?;
    let mut out = AlgebraSummary {
        operator_system: system.dim(),
        ..AlgebraSummary::default()
    };
    let square = ch.dim_in() == ch.dim_out();
    if square {
        out.fixed_points = Some(fixed_point_set(ch, tol)?.dim());
    }
    if class.is_trace_preserving {
        let md = multiplicative_domain_with(ch, Sides::Both, tol);
        let up = unitary_part(ch, tol)?;
        let hom = homomorphism_residuals(ch, &md)?;
        checks.add("md_inside_unitary_part", up.includes(&md, &loose));
        checks.add("md_homomorphism", hom.multiplicative <= ALGEBRA_TOLERANCE);
        checks.add("md_left_inverse", hom.left_inverse <= ALGEBRA_TOLERANCE);
        out.unitary_part = Some(up.dim());
    }
    if class.is_unital {
        let md = multiplicative_domain(ch, tol)?;
        let sys_comm = commutant(&system, tol);
        checks.add("operator_system_commutant_in_md", md.includes(&sys_comm, &loose));
        out.multiplicative_domain = Some(md.dim());
        if class.is_trace_preserving {
            let up = unitary_part(ch, tol)?;
            checks.add("md_equals_operator_system_commutant", subspace_eq(&md, &sys_comm, &loose));
            checks.add("md_equals_unitary_part", subspace_eq(&md, &up, &loose));
            checks.add(
                "md_isometric",
                homomorphism_residuals(ch, &md)?.isometry <= ALGEBRA_TOLERANCE,
            );
            let alg = generated_algebra(&system, tol)?;
            checks.add(
                "generated_algebra_is_md_commutant",
                subspace_eq(&alg, &commutant(&md, tol), &loose),
            );
            out.bicommutant = Some(alg.dim());
            let chain = inclusion_chain_check(ch, tol)?;
            checks.add("inclusion_chain", chain.holds());
            out.inclusion_chain = Some(chain.summary());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurAnalysis {
    pub n: usize,
    pub rank_c: usize,
    pub stats: HadamardRankStats,
    pub channel_rank: usize,
    pub complement_rank: usize,
    pub block_sizes: Vec<usize>,
    pub quotient_rank: usize,
    pub multiplicative_domain: usize,
    pub pattern_dim: usize,
}

pub fn analyze_schur(
    cm: &CorrelationMatrix,
    tol: &Tolerances,
    checks: &mut Checks,
) -> Result<(SchurAnalysis, cpmaps::schur::CorrelationBlockDecomposition)> {
    let n = cm.n();
    let stats = hadamard_rank_stats(cm, tol);
    let ch = make_schur_channel(cm, tol)?;
    let class = classify(&ch, tol)?;
    let rep = uncertainty_report(&ch, tol)?;
    let blocks = modulus_one_blocks(cm, tol)?;
    let rank_c = svd_rank(cm.matrix(), tol).rank;
    let quotient_rank = svd_rank(blocks.quotient.matrix(), tol).rank;
    let md = multiplicative_domain(&ch, tol)?;
    let pattern = blocks.pattern_subspace();

    checks.add("schur_channel_unital_tp", class.is_unital_tp());
    checks.add("channel_rank_is_support_count", rep.rank_phi == stats.support_count);
    checks.add("complement_rank_is_hadamard_rank", rep.rank_comp == stats.rank_cc);
    checks.add("support_rank_product", stats.product >= n * n);
    checks.add(
        "equality_characterization",
        if stats.equality {
            stats.product == n * n
        } else {
            stats.product > n * n
        },
    );
    checks.add("rank_product_bound", rep.holds());
    checks.add("rank_c_equals_quotient_rank", rank_c == quotient_rank);
    checks.add(
        "md_matches_block_pattern",
        subspace_eq(
            &md,
            &pattern,
            &Tolerances {
                tol_eq: ALGEBRA_TOLERANCE,
                ..*tol
            },
        ),
    );
    Ok((
        SchurAnalysis {
            n,
            rank_c,
            stats,
            channel_rank: rep.rank_phi,
            complement_rank: rep.rank_comp,
            block_sizes: blocks.block_sizes(),
            quotient_rank,
            multiplicative_domain: md.dim(),
            pattern_dim: pattern.dim(),
        },
        blocks,
    ))
}
