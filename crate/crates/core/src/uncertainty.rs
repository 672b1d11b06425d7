//! Ranks, norms and the rank product bound for a channel and its complement.
//!
//! For a CP map with representing matrix `T`,
//! `rank(Φ) rank(Φ^C) ≥ ‖Φ(I)‖²_HS ‖Φ^C(I)‖²_HS / (‖Φ‖² ‖Φ^C‖²)`,
//! where `‖Φ‖` is the largest singular value of `T` and ranks are ranks of the
//! representing matrices.

use serde::Serialize;

use crate::channel::{apply, choi_matrix, complement_channel, representing_matrix, Channel};
use crate::error::{Error, Result};
use crate::matcore::{
    eig_hermitian_with, hs_norm, identity, psd_from_eigen, svd_rank, trace, Tolerances,
};

/// Pass/fail threshold applied to [`UncertaintyReport::slack`].
pub const SLACK_TOLERANCE: f64 = 1e-8;

pub fn channel_operator_norm(ch: &Channel) -> f64 {
    svd_rank(&representing_matrix(ch), &Tolerances::default()).sigma_max()
}

pub fn channel_rank(ch: &Channel, tol: &Tolerances) -> usize {
    svd_rank(&representing_matrix(ch), tol).rank
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub rank_phi: usize,
    pub rank_comp: usize,
    pub norm_phi: f64,
    pub norm_comp: f64,
    /// `‖Φ(I)‖_HS`
    pub hs_phi_id: f64,
    /// `‖Φ^C(I)‖_HS`
    pub hs_comp_id: f64,
    pub bound: f64,
    pub product: usize,
    pub slack: f64,
    /// `‖Φ^C(I)‖² / ‖Φ‖²`, a lower bound for `rank_phi`.
    pub bound_phi: f64,
    /// `‖Φ(I)‖² / ‖Φ^C‖²`, a lower bound for `rank_comp`.
    pub bound_comp: f64,
    /// `Tr(T_Φ T_Φ*)`, which should equal `‖Φ^C(I)‖²_HS`.
    pub trace_tt: f64,
}

impl UncertaintyReport {
    pub fn holds(&self) -> bool {
        self.slack >= -SLACK_TOLERANCE
    }

    pub fn one_sided_hold(&self) -> bool {
        self.rank_phi as f64 >= self.bound_phi - SLACK_TOLERANCE * self.bound_phi.max(1.0)
            && self.rank_comp as f64 >= self.bound_comp - SLACK_TOLERANCE * self.bound_comp.max(1.0)
    }

    /// `|Tr(T T*) − ‖Φ^C(I)‖²|` relative to `1 + Tr(T T*)`.
    pub fn norm_identity_residual(&self) -> f64 {
        (self.trace_tt - self.hs_comp_id.powi(2)).abs() / (1.0 + self.trace_tt.abs())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn uncertainty_report(ch: &Channel, tol: &Tolerances) -> Result<UncertaintyReport> {
    let eig = eig_hermitian_with(&choi_matrix(ch), tol.tol_herm)?;
    let psd = psd_from_eigen(&eig, tol);
    if !psd.is_psd {
        return Err(Error::NotPsd {
            eigenvalue: psd.min_eigenvalue,
            allowance: psd.allowance,
        });
    }
    let comp = complement_channel(ch);
    let t_phi = representing_matrix(ch);
    let t_comp = representing_matrix(&comp);
    let svd_phi = svd_rank(&t_phi, tol);
    let svd_comp = svd_rank(&t_comp, tol);

    let id = identity(ch.dim_in());
    let hs_phi_id = hs_norm(&apply(ch, &id)?);
    let hs_comp_id = hs_norm(&apply(&comp, &id)?);
    let norm_phi = svd_phi.sigma_max();
    let norm_comp = svd_comp.sigma_max();

    let bound = ratio(
        hs_phi_id.powi(2) * hs_comp_id.powi(2),
        norm_phi.powi(2) * norm_comp.powi(2),
    );
    let product = svd_phi.rank * svd_comp.rank;
    Ok(UncertaintyReport {
        rank_phi: svd_phi.rank,
        rank_comp: svd_comp.rank,
        norm_phi,
        norm_comp,
        hs_phi_id,
        hs_comp_id,
        bound,
        product,
        slack: product as f64 - bound,
        bound_phi: ratio(hs_comp_id.powi(2), norm_phi.powi(2)),
        bound_comp: ratio(hs_phi_id.powi(2), norm_comp.powi(2)),
        trace_tt: trace(&(&t_phi * t_phi.adjoint())).re,
    })
}

/// `Σ_{ij} ‖K_i* K_j‖²_HS`; at most `m` for unital channels.
pub fn kraus_gram_hs_sum(ch: &Channel) -> f64 {
    let k = ch.kraus();
    k.iter()
        .flat_map(|a| k.iter().map(move |b| hs_norm(&(a.adjoint() * b)).powi(2)))
        .sum()
}
