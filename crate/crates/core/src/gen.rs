//! Seeded random generators for the ensemble checks.
//!
//! Every generator is a pure function of its parameters and a [`Seed`]; the
//! underlying stream is ChaCha8, so outputs are identical across platforms.

use nalgebra::QR;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::dstoch::DoublyStochasticMatrix;
use crate::error::{Error, Result};
use crate::matcore::{c, ComplexMatrix, RealMatrix, C64};
use crate::schur::CorrelationMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Derives an independent seed for sub-draw `index` (SplitMix64 finalizer).
    pub fn child(self, index: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    })
}

/// Uniform point on the probability simplex with `k` vertices.
fn simplex_weights(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

fn haar_from_rng(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let qr = QR::new(g);
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase: C64 = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed unitary from a QR factorization of a complex Ginibre matrix,
/// with the phases of `R`'s diagonal folded into `Q`.
pub fn haar_unitary(n: usize, seed: Seed) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Precondition("haar_unitary needs n >= 1".into()));
    }
    Ok(haar_from_rng(&mut seed.rng(), n))
}

/// Trace-preserving channel `M_n -> M_m` with `p` Kraus operators sliced from
/// the first `n` columns of a Haar unitary on `C^{mp}`.
pub fn random_tp_channel(n: usize, m: usize, p: usize, seed: Seed) -> Result<Channel> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::Precondition("dimensions must be positive".into()));
    }
    if m * p < n {
        return Err(Error::Precondition(format!(
            "no isometry C^{n} -> C^{} exists (need m*p >= n)",
            m * p
        )));
    }
    let u = haar_from_rng(&mut seed.rng(), m * p);
    let kraus = (0..p)
        .map(|i| u.view((i * m, 0), (m, n)).into_owned())
        .collect();
    Channel::new(n, m, kraus)
}

/// Mixed-unitary channel `X ↦ Σ p_i U_i X U_i*` with simplex-uniform weights.
pub fn mixed_unitary_channel(n: usize, k: usize, seed: Seed) -> Result<Channel> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition("n and k must be positive".into()));
    }
    let mut rng = seed.rng();
    let weights = simplex_weights(&mut rng, k);
    let kraus = weights
        .iter()
        .map(|w| haar_from_rng(&mut rng, n) * c(w.sqrt(), 0.0))
        .collect();
    Channel::new(n, n, kraus)
}

/// Correlation matrix `D^{-1/2} W W* D^{-1/2}` from an `n x r` Gaussian `W`.
pub fn random_correlation_matrix(n: usize, r: usize, seed: Seed) -> Result<CorrelationMatrix> {
    if n == 0 || r == 0 || r > n {
        return Err(Error::Precondition(format!(
            "need 1 <= r <= n, got n = {n}, r = {r}"
        )));
    }
    const MAX_RETRIES: usize = 16;
    let mut rng = seed.rng();
    for _ in 0..MAX_RETRIES {
        let w = gaussian_matrix(&mut rng, n, r);
        let g = &w * w.adjoint();
        let d: Vec<f64> = (0..n).map(|i| g[(i, i)].re).collect();
        if d.iter().any(|&x| x <= 0.0) {
            continue;
        }
        let mut cm = ComplexMatrix::from_fn(n, n, |i, j| g[(i, j)] / (d[i] * d[j]).sqrt());
        for i in 0..n {
            cm[(i, i)] = c(1.0, 0.0);
            for j in 0..i {
                cm[(i, j)] = cm[(j, i)].conj();
            }
        }
        return CorrelationMatrix::new(cm);
    }
    Err(Error::Precondition(
        "degenerate Gram diagonal after repeated draws".into(),
    ))
}

/// Convex combination of `k` uniformly random permutation matrices.
pub fn random_ds(n: usize, k: usize, seed: Seed) -> Result<DoublyStochasticMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition("n and k must be positive".into()));
    }
    let mut rng = seed.rng();
    let weights = simplex_weights(&mut rng, k);
    let mut d = RealMatrix::zeros(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    for w in weights {
        perm.shuffle(&mut rng);
        for (i, &j) in perm.iter().enumerate() {
            d[(i, j)] += w;
        }
    }
    Ok(DoublyStochasticMatrix::new_unchecked(d))
}
