//! Operator subspaces of `M_n` and the algebras attached to a channel:
//! commutants, generated algebras, fixed points, multiplicative domains,
//! quasiorthogonality and privatization.
//!
//! Subspaces carry a Hilbert–Schmidt orthonormal basis. Inclusion and
//! equality are decided by projection residuals against `tol_eq`.

use serde::Serialize;

use crate::channel::{
    adjoint_channel, apply, classify, complement_channel, compose, representing_matrix,
    unital_residual, Channel,
};
use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    c, hs_norm, identity, kron, matrix_unit, null_space_below, range_basis, trace, unvec, vec,
    ComplexMatrix, ComplexVector, Tolerances,
};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    star_closed: bool,
    contains_identity: bool,
}

impl OperatorSubspace {
    /// Wraps a basis that is already HS-orthonormal and computes the flags.
    pub(crate) fn from_orthonormal(n: usize, basis: Vec<ComplexMatrix>, tol: &Tolerances) -> Self {
        let mut s = OperatorSubspace {
            ambient_dim: n,
            basis,
            star_closed: false,
            contains_identity: false,
        };
        s.star_closed = s.basis.iter().all(|b| s.residual(&b.adjoint()) <= tol.tol_eq);
        s.contains_identity =
            n > 0 && s.residual(&identity(n)) <= tol.tol_eq * (n as f64).sqrt();
        s
    }

    fn from_vectors(n: usize, vectors: Vec<ComplexVector>, tol: &Tolerances) -> Self {
        let basis = vectors
            .iter()
            .map(|v| unvec(v, n, n).expect("vector length is n^2"))
            .collect();
        Self::from_orthonormal(n, basis, tol)
    }

    /// All of `M_n`, with the matrix units as basis.
    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .flat_map(|j| (0..n).map(move |i| matrix_unit(n, n, i, j)))
            .collect();
        OperatorSubspace {
            ambient_dim: n,
            basis,
            star_closed: true,
            contains_identity: n > 0,
        }
    }

    /// `ℂ I_n`.
    pub fn scalars(n: usize) -> Self {
        OperatorSubspace {
            ambient_dim: n,
            basis: vec![identity(n) * c(1.0 / (n as f64).sqrt(), 0.0)],
            star_closed: true,
            contains_identity: true,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn star_closed(&self) -> bool {
        self.star_closed
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    /// Orthogonal projection in the HS inner product.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += b * b.dotc(x);
        }
        out
    }

    /// `‖X − P(X)‖_HS`.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        hs_norm(&(x - self.project(x)))
    }

    /// Largest residual of `other`'s basis elements projected onto `self`.
    pub fn inclusion_residual(&self, other: &OperatorSubspace) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.residual(b))
            .fold(0.0, f64::max)
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &OperatorSubspace, tol: &Tolerances) -> bool {
        self.ambient_dim == other.ambient_dim && self.inclusion_residual(other) <= tol.tol_eq
    }

    /// Largest HS deviation of the basis Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dotc(b) - c(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Equal dimension and mutual inclusion.
pub fn subspace_eq(a: &OperatorSubspace, b: &OperatorSubspace, tol: &Tolerances) -> bool {
    a.dim() == b.dim() && a.includes(b, tol) && b.includes(a, tol)
}

fn check_ambient(a: &OperatorSubspace, b: &OperatorSubspace) -> Result<()> {
    if a.ambient_dim != b.ambient_dim {
        return Err(dim_err(
            format!("ambient dimension {}", a.ambient_dim),
            b.ambient_dim,
        ));
    }
    Ok(())
}

/// HS-orthonormal basis for the span of `generators`, all `n x n`.
pub fn span_of(generators: &[ComplexMatrix], tol: &Tolerances) -> Result<OperatorSubspace> {
    let first = generators
        .first()
        .ok_or_else(|| Error::Precondition("span_of needs at least one generator".into()))?;
    let n = first.nrows();
    for g in generators {
        if g.shape() != (n, n) {
            return Err(dim_err(
                format!("{n}x{n}"),
                format!("{}x{}", g.nrows(), g.ncols()),
            ));
        }
    }
    let stacked = ComplexMatrix::from_columns(&generators.iter().map(vec).collect::<Vec<_>>());
    Ok(OperatorSubspace::from_vectors(n, range_basis(&stacked, tol), tol))
}

/// `S_Φ = span{K_i* K_j}`.
pub fn operator_system(ch: &Channel, tol: &Tolerances) -> Result<OperatorSubspace> {
    let k = ch.kraus();
    let gens: Vec<ComplexMatrix> = k
        .iter()
        .flat_map(|a| k.iter().map(move |b| a.adjoint() * b))
        .collect();
    span_of(&gens, tol)
}

fn stack_rows(blocks: &[ComplexMatrix], cols: usize) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        out.rows_mut(offset, b.nrows()).copy_from(b);
        offset += b.nrows();
    }
    out
}

/// `{X : X B = B X for every basis element B}`, from one stacked null-space problem.
pub fn commutant(s: &OperatorSubspace, tol: &Tolerances) -> OperatorSubspace {
    let n = s.ambient_dim;
    if s.dim() == 0 {
        return OperatorSubspace::full(n);
    }
    let id = identity(n);
    let blocks: Vec<ComplexMatrix> = s
        .basis
        .iter()
        .map(|b| kron(&b.transpose(), &id) - kron(&id, b))
        .collect();
    let constraints = stack_rows(&blocks, n * n);
    // basis elements have unit HS norm, so each block has norm at most 2;
    // X is kept when its commutators are below tol_eq
    OperatorSubspace::from_vectors(n, null_space_below(&constraints, tol.tol_eq), tol)
}

/// `Alg(S) = S″`, verified to contain `S` and to be closed under products.
pub fn generated_algebra(s: &OperatorSubspace, tol: &Tolerances) -> Result<OperatorSubspace> {
    if !s.star_closed {
        return Err(Error::Precondition(
            "generated_algebra needs a star-closed subspace (star_closed = false)".into(),
        ));
    }
    if !s.contains_identity {
        return Err(Error::Precondition(
            "generated_algebra needs a subspace containing I (contains_identity = false)".into(),
        ));
    }
    let alg = commutant(&commutant(s, tol), tol);
    let containment = alg.inclusion_residual(s);
    if containment > tol.tol_eq {
        return Err(Error::Consistency {
            residual: containment,
            tol: tol.tol_eq,
        });
    }
    let closure = product_closure_residual(&alg);
    if closure > tol.tol_eq {
        return Err(Error::Consistency {
            residual: closure,
            tol: tol.tol_eq,
        });
    }
    Ok(alg)
}

/// Largest residual of `A_i A_j` projected onto the subspace.
pub fn product_closure_residual(s: &OperatorSubspace) -> f64 {
    let mut worst: f64 = 0.0;
    for a in &s.basis {
        for b in &s.basis {
            worst = worst.max(s.residual(&(a * b)));
        }
    }
    worst
}

/// `{X : Φ(X) = X}`.
pub fn fixed_point_set(ch: &Channel, tol: &Tolerances) -> Result<OperatorSubspace> {
    let n = ch.dim_in();
    if ch.dim_out() != n {
        return Err(dim_err(format!("{n} -> {n}"), format!("{n} -> {}", ch.dim_out())));
    }
    let t = representing_matrix(ch) - identity(n * n);
    Ok(OperatorSubspace::from_vectors(n, null_space_below(&t, tol.tol_eq), tol))
}

/// Which product identities define the multiplicative domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sides {
    /// `Φ(X)Φ(Y) = Φ(XY)` for all `Y`.
    Left,
    /// `Φ(X)Φ(Y) = Φ(XY)` and `Φ(Y)Φ(X) = Φ(YX)` for all `Y`.
    Both,
}

/// Multiplicative domain of a unital map, two-sided.
pub fn multiplicative_domain(ch: &Channel, tol: &Tolerances) -> Result<OperatorSubspace> {
    let residual = unital_residual(ch);
    if residual > tol.tol_eq {
        return Err(Error::Precondition(format!(
            "multiplicative domain needs a unital map (residual {residual:e})"
        )));
    }
    Ok(multiplicative_domain_with(ch, Sides::Both, tol))
}

/// Multiplicative domain without the unitality precondition.
pub fn multiplicative_domain_with(
    ch: &Channel,
    sides: Sides,
    tol: &Tolerances,
) -> OperatorSubspace {
    let (n, m) = (ch.dim_in(), ch.dim_out());
    let t = representing_matrix(ch);
    let (id_n, id_m) = (identity(n), identity(m));
    let mut blocks = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let e = matrix_unit(n, n, i, j);
            let phi_e = apply(ch, &e).expect("unit has input shape");
            // vec(Φ(X)Φ(E)) − vec(Φ(XE))
            blocks.push(kron(&phi_e.transpose(), &id_m) * &t - &t * kron(&e.transpose(), &id_n));
            if sides == Sides::Both {
                // vec(Φ(E)Φ(X)) − vec(Φ(EX))
                blocks.push(kron(&id_m, &phi_e) * &t - &t * kron(&id_n, &e));
            }
        }
    }
    let constraints = stack_rows(&blocks, n * n);
    // each term is quadratic in T
    let scale = hs_norm(&t).powi(2).max(1.0);
    OperatorSubspace::from_vectors(n, null_space_below(&constraints, tol.tol_eq * scale), tol)
}

/// `|Tr(A_i B_j) − Tr(A_i) Tr(B_j)/n| ≤ tol_eq` over all basis pairs.
pub fn quasiorthogonal(a: &OperatorSubspace, b: &OperatorSubspace, tol: &Tolerances) -> Result<bool> {
    Ok(quasiorthogonality_residual(a, b)? <= tol.tol_eq)
}

pub fn quasiorthogonality_residual(a: &OperatorSubspace, b: &OperatorSubspace) -> Result<f64> {
    check_ambient(a, b)?;
    let n = a.ambient_dim as f64;
    let mut worst: f64 = 0.0;
    for x in &a.basis {
        let tx = trace(x);
        for y in &b.basis {
            let lhs = trace(&(x * y));
            worst = worst.max((lhs - tx * trace(y) / c(n, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// Outcome of both privatization routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivatizationCheck {
    /// `‖Φ(A_k) − (Tr(A_k)/n) Φ(I)‖_HS ≤ tol_eq` for every basis element.
    pub privatized: bool,
    pub max_residual: f64,
    /// Quasiorthogonality of the algebra to `range(Φ†)`.
    pub quasiorthogonal: bool,
    pub quasiorthogonality_residual: f64,
}

impl PrivatizationCheck {
    pub fn routes_agree(&self) -> bool {
        self.privatized == self.quasiorthogonal
    }
}

pub fn privatization_check(
    ch: &Channel,
    a: &OperatorSubspace,
    tol: &Tolerances,
) -> Result<PrivatizationCheck> {
    let n = ch.dim_in();
    if a.ambient_dim != n {
        return Err(dim_err(format!("ambient dimension {n}"), a.ambient_dim));
    }
    let phi_id = apply(ch, &identity(n))?;
    let mut max_residual: f64 = 0.0;
    for b in &a.basis {
        let target = &phi_id * (trace(b) / c(n as f64, 0.0));
        max_residual = max_residual.max(hs_norm(&(apply(ch, b)? - target)));
    }
    let m = ch.dim_out();
    let dual = adjoint_channel(ch);
    let images = (0..m)
        .flat_map(|j| (0..m).map(move |i| matrix_unit(m, m, i, j)))
        .map(|e| apply(&dual, &e))
        .collect::<Result<Vec<_>>>()?;
    let range = span_of(&images, tol)?;
    let qo = quasiorthogonality_residual(a, &range)?;
    Ok(PrivatizationCheck {
        privatized: max_residual <= tol.tol_eq,
        max_residual,
        quasiorthogonal: qo <= tol.tol_eq,
        quasiorthogonality_residual: qo,
    })
}

/// Image of a subspace under a map, re-spanned.
pub fn image(ch: &Channel, s: &OperatorSubspace, tol: &Tolerances) -> Result<OperatorSubspace> {
    if s.dim() == 0 {
        let m = ch.dim_out();
        return Ok(OperatorSubspace::from_orthonormal(m, Vec::new(), tol));
    }
    let images = s
        .basis
        .iter()
        .map(|b| apply(ch, b))
        .collect::<Result<Vec<_>>>()?;
    span_of(&images, tol)
}

/// `MD(Φ^C) ⊆ Φ^{C†}(MD(Φ^{C†})) ⊆ S_Φ ⊆ S_Φ″`, plus `S_Φ″ = MD(Φ)′`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionChain {
    pub md_complement: OperatorSubspace,
    pub complement_image: OperatorSubspace,
    pub operator_system: OperatorSubspace,
    pub bicommutant: OperatorSubspace,
    pub md_commutant: OperatorSubspace,
    /// `MD(Φ^C) ⊆ Φ^{C†}(MD(Φ^{C†}))`
    pub md_in_image: bool,
    /// `Φ^{C†}(MD(Φ^{C†})) ⊆ S_Φ`
    pub image_in_system: bool,
    /// `S_Φ ⊆ S_Φ″`
    pub system_in_bicommutant: bool,
    /// `S_Φ″ = MD(Φ)′`
    pub bicommutant_is_md_commutant: bool,
}

impl InclusionChain {
    pub fn holds(&self) -> bool {
        self.md_in_image
            && self.image_in_system
            && self.system_in_bicommutant
            && self.bicommutant_is_md_commutant
    }

    pub fn summary(&self) -> InclusionSummary {
        InclusionSummary {
            dims: [
                self.md_complement.dim(),
                self.complement_image.dim(),
                self.operator_system.dim(),
                self.bicommutant.dim(),
            ],
            md_commutant_dim: self.md_commutant.dim(),
            md_in_image: self.md_in_image,
            image_in_system: self.image_in_system,
            system_in_bicommutant: self.system_in_bicommutant,
            bicommutant_is_md_commutant: self.bicommutant_is_md_commutant,
            holds: self.holds(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InclusionSummary {
    /// Dimensions of `MD(Φ^C)`, `Φ^{C†}(MD(Φ^{C†}))`, `S_Φ`, `S_Φ″`.
    pub dims: [usize; 4],
    pub md_commutant_dim: usize,
    pub md_in_image: bool,
    pub image_in_system: bool,
    pub system_in_bicommutant: bool,
    pub bicommutant_is_md_commutant: bool,
    pub holds: bool,
}

pub fn inclusion_chain_check(ch: &Channel, tol: &Tolerances) -> Result<InclusionChain> {
    let class = classify(ch, tol)?;
    if !class.is_unital_tp() {
        return Err(Error::Precondition(format!(
            "inclusion chain needs a unital trace-preserving channel (tp residual {:e}, unital residual {:e})",
            class.tp_residual, class.unital_residual
        )));
    }
    let comp = complement_channel(ch);
    let comp_dual = adjoint_channel(&comp);
    let md_complement = multiplicative_domain_with(&comp, Sides::Both, tol);
    let md_dual = multiplicative_domain_with(&comp_dual, Sides::Both, tol);
    let complement_image = image(&comp_dual, &md_dual, tol)?;
    let operator_system = operator_system(ch, tol)?;
    let bicommutant = generated_algebra(&operator_system, tol)?;
    let md_commutant = commutant(&multiplicative_domain(ch, tol)?, tol);
    Ok(InclusionChain {
        md_in_image: complement_image.includes(&md_complement, tol),
        image_in_system: operator_system.includes(&complement_image, tol),
        system_in_bicommutant: bicommutant.includes(&operator_system, tol),
        bicommutant_is_md_commutant: subspace_eq(&bicommutant, &md_commutant, tol),
        md_complement,
        complement_image,
        operator_system,
        bicommutant,
        md_commutant,
    })
}

/// Residuals of the homomorphism properties of `Φ` on a subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomomorphismResiduals {
    /// `max ‖Φ(AB) − Φ(A)Φ(B)‖_HS` over basis pairs.
    pub multiplicative: f64,
    /// `max |‖Φ(A)‖_HS − ‖A‖_HS|` over the basis.
    pub isometry: f64,
    /// `max ‖Φ†(Φ(A)) − A‖_HS` over the basis.
    pub left_inverse: f64,
}

pub fn homomorphism_residuals(ch: &Channel, s: &OperatorSubspace) -> Result<HomomorphismResiduals> {
    let dual = adjoint_channel(ch);
    let images = s
        .basis
        .iter()
        .map(|b| apply(ch, b))
        .collect::<Result<Vec<_>>>()?;
    let mut out = HomomorphismResiduals {
        multiplicative: 0.0,
        isometry: 0.0,
        left_inverse: 0.0,
    };
    for (a, fa) in s.basis.iter().zip(&images) {
        out.isometry = out.isometry.max((hs_norm(fa) - hs_norm(a)).abs());
        out.left_inverse = out.left_inverse.max(hs_norm(&(apply(&dual, fa)? - a)));
        for (b, fb) in s.basis.iter().zip(&images) {
            let lhs = apply(ch, &(a * b))?;
            out.multiplicative = out.multiplicative.max(hs_norm(&(lhs - fa * fb)));
        }
    }
    Ok(out)
}

/// `Fix(Φ† ∘ Φ)`.
pub fn unitary_part(ch: &Channel, tol: &Tolerances) -> Result<OperatorSubspace> {
    fixed_point_set(&compose(&adjoint_channel(ch), ch)?, tol)
}
