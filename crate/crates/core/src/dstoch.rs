//! Doubly stochastic matrices and the matrix `D_Φ = Σ K_i ∘ conj(K_i)` of a
//! unital trace-preserving channel.

use serde::Serialize;

use crate::channel::{classify, Channel};
use crate::error::{Error, Result};
use crate::matcore::{singular_values, svd_rank, RealMatrix, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticMatrix {
    d: RealMatrix,
}

impl DoublyStochasticMatrix {
    pub fn new(d: RealMatrix, tol: &Tolerances) -> Result<Self> {
        let check = check_doubly_stochastic(&d, tol);
        if !check.is_ds {
            return Err(Error::Precondition(format!(
                "not doubly stochastic: {}",
                check.describe()
            )));
        }
        Ok(DoublyStochasticMatrix { d })
    }

    /// Wraps `d` without validation; for matrices that are doubly stochastic by construction.
    pub fn new_unchecked(d: RealMatrix) -> Self {
        DoublyStochasticMatrix { d }
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DsCheck {
    pub is_ds: bool,
    pub square: bool,
    /// Most negative entry, or 0.
    pub min_entry: f64,
    pub max_row_residual: f64,
    pub max_col_residual: f64,
    /// `|Σ d_ij − n|`
    pub total_residual: f64,
}

impl DsCheck {
    fn describe(&self) -> String {
        if !self.square {
            return "matrix is not square".into();
        }
        format!(
            "min entry {:e}, row residual {:e}, column residual {:e}",
            self.min_entry, self.max_row_residual, self.max_col_residual
        )
    }
}

pub fn check_doubly_stochastic(d: &RealMatrix, tol: &Tolerances) -> DsCheck {
    let n = d.nrows();
    if !d.is_square() {
        return DsCheck {
            is_ds: false,
            square: false,
            min_entry: 0.0,
            max_row_residual: f64::INFINITY,
            max_col_residual: f64::INFINITY,
            total_residual: f64::INFINITY,
        };
    }
    let min_entry = d.iter().copied().fold(0.0, f64::min);
    let max_row_residual = d
        .row_iter()
        .map(|r| (r.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let max_col_residual = d
        .column_iter()
        .map(|c| (c.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let total_residual = (d.sum() - n as f64).abs();
    let finite = d.iter().all(|x| x.is_finite());
    DsCheck {
        is_ds: finite
            && min_entry >= -tol.tol_eq
            && max_row_residual <= tol.tol_eq
            && max_col_residual <= tol.tol_eq
            && total_residual <= n as f64 * tol.tol_eq,
        square: true,
        min_entry,
        max_row_residual,
        max_col_residual,
        total_residual,
    }
}

/// `D_Φ[i,j] = Σ_k |(K_k)_ij|²`. Column `j` is the diagonal of `Φ(E_jj)`.
pub fn extract_dphi(ch: &Channel, tol: &Tolerances) -> Result<DoublyStochasticMatrix> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::Precondition(format!(
            "D_Φ needs a square channel, got {} -> {}",
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    let class = classify(ch, tol)?;
    if !class.is_unital_tp() {
        return Err(Error::Precondition(format!(
            "D_Φ needs a unital trace-preserving channel (tp residual {:e}, unital residual {:e})",
            class.tp_residual, class.unital_residual
        )));
    }
    let n = ch.dim_in();
    let mut d = RealMatrix::zeros(n, n);
    for k in ch.kraus() {
        d += k.map(|z| z.norm_sqr());
    }
    DoublyStochasticMatrix::new(d, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankSupport {
    /// Number of entries above `tol_eq`.
    pub support: usize,
    pub rank: usize,
    pub holds: bool,
}

pub fn ds_rank_support_bound(d: &DoublyStochasticMatrix, tol: &Tolerances) -> RankSupport {
    let n = d.n();
    let support = d.matrix().iter().filter(|&&x| x > tol.tol_eq).count();
    let rank = svd_rank(d.matrix(), tol).rank;
    RankSupport {
        support,
        rank,
        holds: support * rank >= n * n,
    }
}

/// Largest singular value; at most 1 for doubly stochastic matrices.
pub fn ds_spectral_norm(d: &DoublyStochasticMatrix) -> f64 {
    singular_values(d.matrix()).first().copied().unwrap_or(0.0)
}
