//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. Vectorization is
//! column-stacking, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)` and a CP map with
//! Kraus operators `K_i` is represented on vectorized inputs by
//! `Σ conj(K_i) ⊗ K_i`.

use nalgebra::{ComplexField, Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;
pub type RealMatrix = DMatrix<f64>;

pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };

/// Numerical thresholds used for rank, positivity and equality decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff. `None` selects `max(rows, cols) * eps`.
    pub tol_rank: Option<f64>,
    pub tol_psd: f64,
    pub tol_eq: f64,
    pub tol_herm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_rank: None,
            tol_psd: 1e-10,
            tol_eq: 1e-9,
            tol_herm: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("tol_rank", self.tol_rank.unwrap_or(1.0)),
            ("tol_psd", self.tol_psd),
            ("tol_eq", self.tol_eq),
            ("tol_herm", self.tol_herm),
        ];
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }

    /// Relative cutoff for a `rows x cols` matrix.
    pub fn rank_cutoff(&self, rows: usize, cols: usize) -> f64 {
        self.tol_rank
            .unwrap_or(rows.max(cols).max(1) as f64 * f64::EPSILON)
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// The matrix unit `E_ij` of shape `rows x cols`.
pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(rows, cols);
    e[(i, j)] = ONE;
    e
}

pub fn from_real(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| c(x, 0.0))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().copied().sum()
}

/// Largest entrywise modulus of `a - b`. Shapes must agree.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_residual(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(a, &a.adjoint())
}

fn require_square(a: &ComplexMatrix) -> Result<usize> {
    if a.is_square() {
        Ok(a.nrows())
    } else {
        Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        })
    }
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, aligned with `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*lambda);
        }
        scaled * v.adjoint()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    eig_hermitian_with(a, Tolerances::default().tol_herm)
}

pub fn eig_hermitian_with(a: &ComplexMatrix, tol_herm: f64) -> Result<HermitianEigen> {
    let n = require_square(a)?;
    let residual = hermitian_residual(a);
    if residual > tol_herm {
        return Err(Error::NotHermitian {
            residual,
            tol: tol_herm,
        });
    }
    if n == 0 {
        return Ok(HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let sym = (a + a.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Outcome of a PSD test: `λ_min ≥ -tol_psd · max(λ_max, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub allowance: f64,
}

pub fn psd_check(a: &ComplexMatrix, tol: &Tolerances) -> Result<PsdCheck> {
    let eig = eig_hermitian_with(a, tol.tol_herm)?;
    Ok(psd_from_eigen(&eig, tol))
}

pub(crate) fn psd_from_eigen(eig: &HermitianEigen, tol: &Tolerances) -> PsdCheck {
    let max_eigenvalue = eig.max_eigenvalue();
    let min_eigenvalue = eig.min_eigenvalue();
    let allowance = tol.tol_psd * max_eigenvalue.max(1.0);
    PsdCheck {
        is_psd: min_eigenvalue >= -allowance,
        min_eigenvalue,
        max_eigenvalue,
        allowance,
    }
}

/// Singular values (descending) and numerical rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvdRank {
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

impl SvdRank {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// One-sided (Hestenes) Jacobi SVD: `a v_j = σ_j u_j` with `v` square unitary.
///
/// Singular values are descending and there are `cols` of them; beyond
/// `min(rows, cols)` they are zero up to rounding. Columns of `u` whose
/// singular value is exactly zero are left zero.
#[derive(Debug, Clone)]
pub struct JacobiSvd {
    pub singular_values: Vec<f64>,
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Applies the rotation that decouples columns `i` and `j` after the phase
/// of column `j` has been aligned.
fn rotate_columns(m: &mut ComplexMatrix, i: usize, j: usize, cs: f64, sn: f64, phase: C64) {
    for r in 0..m.nrows() {
        let a = m[(r, i)];
        let b = m[(r, j)] * phase.conj();
        m[(r, i)] = a * cs - b * sn;
        m[(r, j)] = a * sn + b * cs;
    }
}

pub fn jacobi_svd(a: &ComplexMatrix) -> JacobiSvd {
    let (rows, cols) = a.shape();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(cols, cols);
    let eps = f64::EPSILON * (rows.max(1) as f64);
    // columns this small are zero for every purpose; rotating them only churns rounding
    let negligible = (f64::EPSILON * f64::EPSILON) * a.norm_squared() * 1e-4;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dotc(&w.column(j));
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let phase = gamma.unscale(g);
                let phase = phase.unscale(phase.norm());
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_columns(&mut w, i, j, cs, sn, phase);
                rotate_columns(&mut v, i, j, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = ComplexMatrix::zeros(rows, cols);
    let mut vs = ComplexMatrix::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            u.set_column(k, &(w.column(j) / c(norms[j], 0.0)));
        }
        vs.set_column(k, &v.column(j));
    }
    JacobiSvd {
        singular_values: order.iter().map(|&j| norms[j]).collect(),
        u,
        v: vs,
    }
}

fn to_complex<T>(a: &DMatrix<T>) -> ComplexMatrix
where
    T: ComplexField<RealField = f64>,
{
    a.map(|x| Complex::new(x.clone().real(), x.imaginary()))
}

/// The `min(rows, cols)` singular values, descending.
pub fn singular_values<T>(a: &DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64>,
{
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    // the smaller Gram side keeps the sweep short
    let z = to_complex(a);
    let z = if z.nrows() < z.ncols() { z.adjoint() } else { z };
    jacobi_svd(&z).singular_values
}

/// Rank counts singular values strictly above `cutoff · σ_1`; a zero matrix has rank 0.
pub fn svd_rank<T>(a: &DMatrix<T>, tol: &Tolerances) -> SvdRank
where
    T: ComplexField<RealField = f64>,
{
    let singular_values = singular_values(a);
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let threshold = tol.rank_cutoff(a.nrows(), a.ncols()) * sigma_max;
    let rank = if sigma_max == 0.0 {
        0
    } else {
        singular_values.iter().filter(|&&s| s > threshold).count()
    };
    SvdRank {
        singular_values,
        rank,
    }
}

/// Spectral norm `σ_max`.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn range_basis(a: &ComplexMatrix, tol: &Tolerances) -> Vec<ComplexVector> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let svd = jacobi_svd(a);
    let sigma_max = svd.singular_values.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return Vec::new();
    }
    let threshold = tol.rank_cutoff(a.nrows(), a.ncols()) * sigma_max;
    svd.singular_values
        .iter()
        .take_while(|&&s| s > threshold)
        .enumerate()
        .map(|(k, _)| svd.u.column(k).into_owned())
        .collect()
}

/// Orthonormal basis of `{x : a x = 0}`, using the same relative cutoff as [`svd_rank`].
pub fn null_space(a: &ComplexMatrix, tol: &Tolerances) -> Vec<ComplexVector> {
    let sigma_max = singular_values(a).first().copied().unwrap_or(0.0);
    null_space_below(a, tol.rank_cutoff(a.nrows(), a.ncols()) * sigma_max)
}

/// Right singular vectors of `a` whose singular value is at most `threshold`.
/// A wide matrix has `cols - rows` singular values that are zero up to rounding.
pub fn null_space_below(a: &ComplexMatrix, threshold: f64) -> Vec<ComplexVector> {
    if a.ncols() == 0 {
        return Vec::new();
    }
    let svd = jacobi_svd(a);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(k, _)| svd.v.column(k).into_owned())
        .collect()
}

/// Kronecker product with row-major block ordering: `(A⊗B)[(i,k),(j,l)] = A[i,j] B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for j in 0..ca {
        for i in 0..ra {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for l in 0..cb {
                for k in 0..rb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization.
pub fn vec(a: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(a.as_slice())
}

pub fn unvec(v: &ComplexVector, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(dim_err(
            format!("vector of length {}", rows * cols),
            format!("length {}", v.len()),
        ));
    }
    Ok(ComplexMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// Integer square root when `n` is a perfect square.
pub fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Entry permutation on `M_{n²}` sending `conj(B) ⊗ A` to `vec(A) vec(B)*`.
///
/// The permutation is its own inverse and exchanges representing matrices
/// with Choi matrices.
pub fn choi_jamiolkowski(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let size = require_square(m)?;
    let n = exact_sqrt(size).ok_or(Error::NotPerfectSquare(size))?;
    let mut out = ComplexMatrix::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[(k + l * n, i + j * n)] = m[(i * n + k, j * n + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Which tensor factor of `C^{dimA} ⊗ C^{dimB}` to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceSide {
    First,
    Second,
}

pub fn partial_trace(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    side: TraceSide,
) -> Result<ComplexMatrix> {
    let size = dim_a * dim_b;
    if m.shape() != (size, size) {
        return Err(dim_err(
            format!("{size}x{size}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let out = match side {
        TraceSide::Second => ComplexMatrix::from_fn(dim_a, dim_a, |a, a2| {
            (0..dim_b).map(|b| m[(a * dim_b + b, a2 * dim_b + b)]).sum()
        }),
        TraceSide::First => ComplexMatrix::from_fn(dim_b, dim_b, |b, b2| {
            (0..dim_a).map(|a| m[(a * dim_b + b, a * dim_b + b2)]).sum()
        }),
    };
    Ok(out)
}

/// Entrywise (Schur) product.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.shape() != b.shape() {
        return Err(dim_err(
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    Ok(a.component_mul(b))
}

/// `Tr(A* B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(dim_err(
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
