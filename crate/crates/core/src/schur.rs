//! Schur-product channels `X ↦ C ∘ X` for correlation matrices `C`.
//!
//! Besides the channel itself this module exposes the rank statistics of
//! `C ∘ conj(C)`, the decomposition of `C` along its modulus-one entries into
//! rank-one blocks plus a quotient correlation matrix, and the circuits of the
//! column matroid of that quotient.

use std::collections::VecDeque;

use crate::algebra::OperatorSubspace;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::matcore::{
    c, eig_hermitian_with, matrix_unit, psd_from_eigen, svd_rank, ComplexMatrix,
    ComplexVector, HermitianEigen, Tolerances,
};

/// Largest quotient size accepted by [`matroid_circuits`].
pub const MAX_MATROID_SIZE: usize = 12;

/// Hermitian PSD matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    c: ComplexMatrix,
}

impl CorrelationMatrix {
    pub fn new(c: ComplexMatrix) -> Result<Self> {
        Self::new_with(c, &Tolerances::default())
    }

    pub fn new_with(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidCorrelation(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let eig = eig_hermitian_with(&m, tol.tol_herm).map_err(|e| match e {
            Error::NotHermitian { residual, .. } => Error::InvalidCorrelation(format!(
                "not Hermitian (max |C - C*| = {residual:e})"
            )),
            other => other,
        })?;
        let n = m.nrows();
        for i in 0..n {
            if (m[(i, i)] - c(1.0, 0.0)).norm() > tol.tol_eq {
                return Err(Error::InvalidCorrelation(format!(
                    "diagonal entry {i} is {} instead of 1",
                    m[(i, i)]
                )));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)].norm() > 1.0 + tol.tol_eq {
                    return Err(Error::InvalidCorrelation(format!(
                        "entry ({i},{j}) has modulus {} > 1",
                        m[(i, j)].norm()
                    )));
                }
            }
        }
        let psd = psd_from_eigen(&eig, tol);
        if !psd.is_psd {
            return Err(Error::InvalidCorrelation(format!(
                "not positive semidefinite (eigenvalue {:e})",
                psd.min_eigenvalue
            )));
        }
        Ok(CorrelationMatrix { c: m })
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.c
    }

    /// `C ∘ conj(C)`, the entrywise squared moduli.
    pub fn squared_moduli(&self) -> ComplexMatrix {
        self.c.map(|z| c(z.norm_sqr(), 0.0))
    }

    fn eigen(&self, tol: &Tolerances) -> Result<HermitianEigen> {
        eig_hermitian_with(&self.c, tol.tol_herm)
    }

    /// Columns `√λ_k v_k` for the eigenvalues above the rank cutoff.
    fn scaled_eigenvectors(&self, tol: &Tolerances) -> Result<Vec<ComplexVector>> {
        let eig = self.eigen(tol)?;
        let n = self.n();
        let cutoff = tol.rank_cutoff(n, n) * eig.max_eigenvalue();
        Ok(eig
            .eigenvalues
            .iter()
            .enumerate()
            .take_while(|(_, &l)| l > cutoff)
            .map(|(k, &l)| eig.eigenvectors.column(k) * c(l.sqrt(), 0.0))
            .collect())
    }
}

/// Schur channel with diagonal Kraus operators `diag(√λ_k v_k)`.
pub fn make_schur_channel(cm: &CorrelationMatrix, tol: &Tolerances) -> Result<Channel> {
    let kraus = cm
        .scaled_eigenvectors(tol)?
        .into_iter()
        .map(|v| ComplexMatrix::from_diagonal(&v))
        .collect();
    Channel::new(cm.n(), cm.n(), kraus)
}

/// Vectors `w_i` with `c_ij = w_i* w_j`; `w_i*` is row `i` of `[√λ_1 v_1 … √λ_r v_r]`.
pub fn gram_vectors(cm: &CorrelationMatrix, tol: &Tolerances) -> Result<Vec<ComplexVector>> {
    let cols = cm.scaled_eigenvectors(tol)?;
    let r = cols.len();
    Ok((0..cm.n())
        .map(|i| ComplexVector::from_fn(r, |k, _| cols[k][i].conj()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct HadamardRankStats {
    /// `rank(C ∘ conj(C))`
    pub rank_cc: usize,
    /// Number of entries with `|c_ij|² > tol_eq`.
    pub support_count: usize,
    pub product: usize,
    /// `C ∘ conj(C)` is, up to relabeling, a direct sum of equally sized all-ones blocks.
    pub equality: bool,
}

pub fn hadamard_rank_stats(cm: &CorrelationMatrix, tol: &Tolerances) -> HadamardRankStats {
    let cc = cm.squared_moduli();
    let rank_cc = svd_rank(&cc, tol).rank;
    let support_count = cc.iter().filter(|z| z.re > tol.tol_eq).count();
    let zero_one = cc
        .iter()
        .all(|z| z.re <= tol.tol_eq || z.re >= 1.0 - tol.tol_eq);
    let equality = zero_one
        && match modulus_one_components(cm, tol) {
            Ok(blocks) => blocks.windows(2).all(|w| w[0].len() == w[1].len()),
            Err(_) => false,
        };
    HadamardRankStats {
        rank_cc,
        support_count,
        product: rank_cc * support_count,
        equality,
    }
}

/// The blocks of modulus-one entries of `C`, with per-block phases and the
/// quotient correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationBlockDecomposition {
    /// Blocks ordered by their smallest index; members ascending.
    pub blocks: Vec<Vec<usize>>,
    /// Block `k` of `C` equals `v_k v_k*`; the first entry of each `v_k` is 1.
    pub phase_vectors: Vec<ComplexVector>,
    /// `A[k,l] = a_kl` with `C` block `(k,l)` equal to `a_kl v_k v_l*`.
    pub quotient: CorrelationMatrix,
    /// Concatenation of the blocks: position `t` of the relabeled matrix is index `permutation[t]`.
    pub permutation: Vec<usize>,
}

impl CorrelationBlockDecomposition {
    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block index of every original index.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (k, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = k;
            }
        }
        out
    }

    /// Rebuilds `C` from blocks, phases and quotient.
    pub fn reassemble(&self) -> ComplexMatrix {
        let n = self.n();
        let block_of = self.block_of();
        let mut phase = vec![c(0.0, 0.0); n];
        for (k, block) in self.blocks.iter().enumerate() {
            for (t, &i) in block.iter().enumerate() {
                phase[i] = self.phase_vectors[k][t];
            }
        }
        let a = self.quotient.matrix();
        ComplexMatrix::from_fn(n, n, |i, j| {
            a[(block_of[i], block_of[j])] * phase[i] * phase[j].conj()
        })
    }

    /// The pattern algebra `{X : x_ij = 0 unless i, j share a block}` of dimension `Σ k_i²`.
    pub fn pattern_subspace(&self) -> OperatorSubspace {
        let n = self.n();
        let basis = self
            .blocks
            .iter()
            .flat_map(|b| b.iter().flat_map(move |&i| b.iter().map(move |&j| matrix_unit(n, n, i, j))))
            .collect();
        OperatorSubspace::from_orthonormal(n, basis, &Tolerances::default())
    }
}

fn modulus_one_adjacency(cm: &CorrelationMatrix, tol: &Tolerances) -> Vec<Vec<bool>> {
    let n = cm.n();
    let c = cm.matrix();
    (0..n)
        .map(|i| (0..n).map(|j| c[(i, j)].norm_sqr() >= 1.0 - tol.tol_eq).collect())
        .collect()
}

/// Connected components of the modulus-one graph, each verified to be a clique.
fn modulus_one_components(cm: &CorrelationMatrix, tol: &Tolerances) -> Result<Vec<Vec<usize>>> {
    let n = cm.n();
    let adj = modulus_one_adjacency(cm, tol);
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut block = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            block.push(v);
            for u in 0..n {
                if adj[v][u] && !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        block.sort_unstable();
        for &i in &block {
            if let Some(&k) = block.iter().find(|&&k| !adj[i][k]) {
                return Err(incomplete_triple(&adj, i, k));
            }
        }
        blocks.push(block);
    }
    Ok(blocks)
}

/// Finds `(i, j, k)` with edges `i~j`, `j~k` but no edge `i~k`, starting
/// from a non-adjacent pair in one component.
fn incomplete_triple(adj: &[Vec<bool>], i: usize, target: usize) -> Error {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    dist[i] = 0;
    let mut queue = VecDeque::from([i]);
    while let Some(v) = queue.pop_front() {
        for u in 0..n {
            if adj[v][u] && dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    let k = (0..n)
        .find(|&u| dist[u] == 2)
        .unwrap_or(target);
    let j = if parent[k] == usize::MAX { i } else { parent[k] };
    Error::NotComplete { i, j, k }
}

pub fn modulus_one_blocks(
    cm: &CorrelationMatrix,
    tol: &Tolerances,
) -> Result<CorrelationBlockDecomposition> {
    let blocks = modulus_one_components(cm, tol)?;
    let c = cm.matrix();
    let phase_vectors: Vec<ComplexVector> = blocks
        .iter()
        .map(|b| ComplexVector::from_iterator(b.len(), b.iter().map(|&t| c[(b[0], t)].conj())))
        .collect();
    let m = blocks.len();
    let mut a = ComplexMatrix::from_fn(m, m, |k, l| c[(blocks[k][0], blocks[l][0])]);
    for k in 0..m {
        a[(k, k)] = crate::matcore::ONE;
    }
    let quotient = CorrelationMatrix::new_with(a, tol)?;
    let permutation = blocks.iter().flatten().copied().collect();
    let decomposition = CorrelationBlockDecomposition {
        blocks,
        phase_vectors,
        quotient,
        permutation,
    };
    let residual = crate::matcore::max_abs_diff(&decomposition.reassemble(), c);
    if residual > tol.tol_eq {
        return Err(Error::Consistency {
            residual,
            tol: tol.tol_eq,
        });
    }
    Ok(decomposition)
}

/// Minimal linearly dependent column subsets of `A` with at most `max_size`
/// members, in increasing size and then lexicographic order.
pub fn matroid_circuits(
    a: &CorrelationMatrix,
    max_size: usize,
    tol: &Tolerances,
) -> Result<Vec<Vec<usize>>> {
    let m = a.n();
    if m > MAX_MATROID_SIZE {
        return Err(Error::TooLarge {
            what: "quotient size",
            got: m,
            limit: MAX_MATROID_SIZE,
        });
    }
    let cols = a.matrix();
    let mut circuits: Vec<u32> = Vec::new();
    for size in 1..=max_size.min(m) {
        let mut found = Vec::new();
        for mask in subsets_of_size(m, size) {
            if circuits.iter().any(|&cm| cm & !mask == 0) {
                continue;
            }
            let members: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            let sub = ComplexMatrix::from_fn(m, size, |r, k| cols[(r, members[k])]);
            if svd_rank(&sub, tol).rank < size {
                found.push(mask);
            }
        }
        circuits.extend(found);
    }
    Ok(circuits
        .into_iter()
        .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
        .collect())
}

fn subsets_of_size(m: usize, size: usize) -> Vec<u32> {
    let mut out: Vec<u32> = (0u32..(1u32 << m))
        .filter(|mask| mask.count_ones() as usize == size)
        .collect();
    // lexicographic on the sorted member lists
    out.sort_by_key(|&mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect::<Vec<_>>());
    out
}
