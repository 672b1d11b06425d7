//! Completely positive maps in Kraus form and their structural constructions.
//!
//! Two channels are considered equal when their Choi matrices agree; Kraus
//! families are never compared directly since they are only unique up to an
//! isometric mixing.

use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    c, eig_hermitian_with, hs_norm, identity, kron, matrix_unit, max_abs_diff, psd_from_eigen,
    trace, unvec, ComplexMatrix, ComplexVector, Tolerances, ONE,
};

/// A CP map `M_n -> M_m`, `X ↦ Σ K_i X K_i*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    /// Builds a channel after checking that every Kraus operator is `m x n` and `p >= 1`.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::Precondition("channel dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::Precondition("at least one Kraus operator is required".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (dim_out, dim_in) {
                return Err(dim_err(
                    format!("Kraus operator {i} of shape {dim_out}x{dim_in}"),
                    format!("{}x{}", k.nrows(), k.ncols()),
                ));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Format(format!("Kraus operator {i} has non-finite entries")));
            }
        }
        Ok(Channel {
            dim_in,
            dim_out,
            kraus,
        })
    }

    /// Like [`Channel::new`], additionally confirming the Choi matrix is PSD.
    pub fn validated(
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<ComplexMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let ch = Channel::new(dim_in, dim_out, kraus)?;
        let eig = eig_hermitian_with(&choi_matrix(&ch), tol.tol_herm)?;
        let psd = psd_from_eigen(&eig, tol);
        if !psd.is_psd {
            return Err(Error::NotPsd {
                eigenvalue: psd.min_eigenvalue,
                allowance: psd.allowance,
            });
        }
        Ok(ch)
    }

    pub fn identity(n: usize) -> Self {
        Channel::unitary(identity(n))
    }

    /// `X ↦ U X U*`. Any square matrix is accepted; unitarity is the caller's concern.
    pub fn unitary(u: ComplexMatrix) -> Self {
        assert!(u.is_square() && u.nrows() > 0, "unitary channel needs a square matrix");
        let n = u.nrows();
        Channel {
            dim_in: n,
            dim_out: n,
            kraus: vec![u],
        }
    }

    /// Completely depolarizing channel `X ↦ Tr(X) I/n`, Kraus `{e_j e_i* / √n}`.
    pub fn depolarizing(n: usize) -> Self {
        let scale = c(1.0 / (n as f64).sqrt(), 0.0);
        let kraus = (0..n)
            .flat_map(|i| (0..n).map(move |j| matrix_unit(n, n, j, i) * scale))
            .collect();
        Channel {
            dim_in: n,
            dim_out: n,
            kraus,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn num_kraus(&self) -> usize {
        self.kraus.len()
    }
}

pub fn apply(ch: &Channel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ch.dim_in;
    if x.shape() != (n, n) {
        return Err(dim_err(
            format!("{n}x{n} input"),
            format!("{}x{}", x.nrows(), x.ncols()),
        ));
    }
    let mut out = ComplexMatrix::zeros(ch.dim_out, ch.dim_out);
    for k in &ch.kraus {
        out += k * x * k.adjoint();
    }
    Ok(out)
}

/// `Y ↦ Σ K_i* Y K_i`.
pub fn adjoint_channel(ch: &Channel) -> Channel {
    Channel {
        dim_in: ch.dim_out,
        dim_out: ch.dim_in,
        kraus: ch.kraus.iter().map(|k| k.adjoint()).collect(),
    }
}

/// `outer ∘ inner`, with Kraus family `{A_i B_j}`.
pub fn compose(outer: &Channel, inner: &Channel) -> Result<Channel> {
    if outer.dim_in != inner.dim_out {
        return Err(dim_err(
            format!("outer input dimension {}", inner.dim_out),
            outer.dim_in,
        ));
    }
    let kraus = outer
        .kraus
        .iter()
        .flat_map(|a| inner.kraus.iter().map(move |b| a * b))
        .collect();
    Channel::new(inner.dim_in, outer.dim_out, kraus)
}

/// `C = Σ_{ij} E_ij ⊗ Φ(E_ij)`, an `nm x nm` matrix.
pub fn choi_matrix(ch: &Channel) -> ComplexMatrix {
    let (n, m) = (ch.dim_in, ch.dim_out);
    let mut out = ComplexMatrix::zeros(n * m, n * m);
    // Σ_k vec(K_k) vec(K_k)*, which has block (i, j) equal to Φ(E_ij).
    for k in &ch.kraus {
        let v = ComplexVector::from_column_slice(k.as_slice());
        out += &v * v.adjoint();
    }
    out
}

/// Recovers a Kraus family from a PSD Choi matrix.
///
/// Eigenpairs with `λ > cutoff · λ_max` are kept; each `√λ v` is split into
/// `n` consecutive length-`m` pieces which become the columns of a Kraus
/// operator.
pub fn kraus_from_choi(
    choi: &ComplexMatrix,
    n: usize,
    m: usize,
    tol: &Tolerances,
) -> Result<Channel> {
    if n == 0 || m == 0 {
        return Err(Error::Precondition("channel dimensions must be positive".into()));
    }
    if choi.shape() != (n * m, n * m) {
        return Err(dim_err(
            format!("{0}x{0} Choi matrix", n * m),
            format!("{}x{}", choi.nrows(), choi.ncols()),
        ));
    }
    let eig = eig_hermitian_with(choi, tol.tol_herm)?;
    let psd = psd_from_eigen(&eig, tol);
    if !psd.is_psd {
        return Err(Error::NotPsd {
            eigenvalue: psd.min_eigenvalue,
            allowance: psd.allowance,
        });
    }
    let lambda_max = eig.max_eigenvalue();
    let cutoff = tol.rank_cutoff(n * m, n * m) * lambda_max;
    let mut kraus = Vec::new();
    if lambda_max > 0.0 {
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda <= cutoff {
                break;
            }
            let v = eig.eigenvectors.column(idx) * c(lambda.sqrt(), 0.0);
            kraus.push(unvec(&v, m, n)?);
        }
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(m, n));
    }
    Channel::new(n, m, kraus)
}

/// `T_Φ = Σ conj(K_i) ⊗ K_i`, so that `T_Φ vec(X) = vec(Φ(X))`.
pub fn representing_matrix(ch: &Channel) -> ComplexMatrix {
    let (n, m) = (ch.dim_in, ch.dim_out);
    let mut out = ComplexMatrix::zeros(m * m, n * n);
    for k in &ch.kraus {
        out += kron(&k.map(|z| z.conj()), k);
    }
    out
}

/// Complementary map `M_n -> M_p` with Kraus operators `L_r`, where row `j` of
/// `L_r` is row `r` of `K_j`.
pub fn complement_channel(ch: &Channel) -> Channel {
    let p = ch.kraus.len();
    let kraus = (0..ch.dim_out)
        .map(|r| ComplexMatrix::from_fn(p, ch.dim_in, |j, col| ch.kraus[j][(r, col)]))
        .collect();
    Channel {
        dim_in: ch.dim_in,
        dim_out: p,
        kraus,
    }
}

/// Evaluates the complement entrywise: `Φ^C(X)[i,j] = Tr(K_j* K_i X)`.
pub fn complement_entrywise(ch: &Channel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ch.dim_in;
    if x.shape() != (n, n) {
        return Err(dim_err(
            format!("{n}x{n} input"),
            format!("{}x{}", x.nrows(), x.ncols()),
        ));
    }
    let p = ch.kraus.len();
    let kx: Vec<ComplexMatrix> = ch.kraus.iter().map(|k| k * x).collect();
    Ok(ComplexMatrix::from_fn(p, p, |i, j| {
        trace(&(ch.kraus[j].adjoint() * &kx[i]))
    }))
}

/// Structural flags of a channel together with the residuals behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelClass {
    pub is_cp: bool,
    pub is_trace_preserving: bool,
    pub is_unital: bool,
    /// `‖Σ K_i* K_i − I_n‖_HS`
    pub tp_residual: f64,
    /// `‖Σ K_i K_i* − I_m‖_HS`
    pub unital_residual: f64,
    pub choi_min_eigenvalue: f64,
}

impl ChannelClass {
    pub fn is_unital_tp(&self) -> bool {
        self.is_unital && self.is_trace_preserving
    }
}

pub fn tp_residual(ch: &Channel) -> f64 {
    let mut s = -identity(ch.dim_in);
    for k in &ch.kraus {
        s += k.adjoint() * k;
    }
    hs_norm(&s)
}

pub fn unital_residual(ch: &Channel) -> f64 {
    let mut s = -identity(ch.dim_out);
    for k in &ch.kraus {
        s += k * k.adjoint();
    }
    hs_norm(&s)
}

pub fn classify(ch: &Channel, tol: &Tolerances) -> Result<ChannelClass> {
    let eig = eig_hermitian_with(&choi_matrix(ch), tol.tol_herm)?;
    let psd = psd_from_eigen(&eig, tol);
    let tp = tp_residual(ch);
    let unital = unital_residual(ch);
    Ok(ChannelClass {
        is_cp: psd.is_psd,
        is_trace_preserving: tp <= tol.tol_eq,
        is_unital: unital <= tol.tol_eq,
        tp_residual: tp,
        unital_residual: unital,
        choi_min_eigenvalue: psd.min_eigenvalue,
    })
}

/// Largest entrywise difference between the Choi matrices of two channels.
pub fn map_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out) {
        return Err(dim_err(
            format!("{}->{}", a.dim_in, a.dim_out),
            format!("{}->{}", b.dim_in, b.dim_out),
        ));
    }
    Ok(max_abs_diff(&choi_matrix(a), &choi_matrix(b)))
}

pub fn same_map(a: &Channel, b: &Channel, tol: &Tolerances) -> bool {
    map_distance(a, b).map(|d| d <= tol.tol_eq).unwrap_or(false)
}

/// Unitary `U` on `C^n ⊗ C^p` with `U (x ⊗ e_1) = Σ K_i x ⊗ e_i`.
///
/// The isometry's columns are completed to an orthonormal basis by
/// Gram–Schmidt against the standard basis vectors taken in index order.
pub fn stinespring_unitary(ch: &Channel, tol: &Tolerances) -> Result<ComplexMatrix> {
    let (n, m, p) = (ch.dim_in, ch.dim_out, ch.kraus.len());
    if n != m {
        return Err(Error::Precondition(format!(
            "square dilation needs dim_in = dim_out, got {n} -> {m}"
        )));
    }
    let residual = tp_residual(ch);
    if residual > tol.tol_eq {
        return Err(Error::Precondition(format!(
            "channel is not trace-preserving (residual {residual:e})"
        )));
    }
    let size = n * p;
    let mut isometry = ComplexMatrix::zeros(size, n);
    for (i, k) in ch.kraus.iter().enumerate() {
        for a in 0..n {
            for b in 0..n {
                isometry[(a * p + i, b)] = k[(a, b)];
            }
        }
    }

    let mut basis: Vec<ComplexVector> = (0..n).map(|b| isometry.column(b).into_owned()).collect();
    let mut extra = Vec::with_capacity(size - n);
    for idx in 0..size {
        if basis.len() == size {
            break;
        }
        let mut v = ComplexVector::zeros(size);
        v[idx] = ONE;
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v.unscale_mut(norm);
            basis.push(v.clone());
            extra.push(v);
        }
    }
    debug_assert_eq!(extra.len(), size - n);

    let mut u = ComplexMatrix::zeros(size, size);
    let mut fill = extra.into_iter();
    for b in 0..n {
        u.set_column(b * p, &isometry.column(b));
        for j in 1..p {
            let col = fill.next().expect("completion has n(p-1) vectors");
            u.set_column(b * p + j, &col);
        }
    }
    Ok(u)
}
