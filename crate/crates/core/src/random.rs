//! Seeded random primitives: complex Gaussians, Ginibre matrices, Haar unitaries.
//!
//! Every function takes the generator explicitly.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qmat::{CMatrix, C64};

/// Generator used for all seeded work in this crate.
pub type StateRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. `N(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `rows × cols` matrix of i.i.d. complex Gaussians, returned as columns.
pub fn ginibre_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<C64>> {
    (0..cols)
        .map(|_| (0..rows).map(|_| complex_gaussian(rng)).collect())
        .collect()
}

/// `G G†` for a `dim × rank` Ginibre matrix `G`.
pub fn ginibre_gram<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let cols = ginibre_columns(dim, rank, rng);
    CMatrix::from_fn(dim, |i, j| cols.iter().map(|g| g[i] * g[j].conj()).sum())
}

pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-random unitary from Gram–Schmidt on Ginibre columns.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut cols = ginibre_columns(dim, dim, rng);
    for k in 0..dim {
        for j in 0..k {
            let (done, rest) = cols.split_at_mut(k);
            let q = &done[j];
            let proj: C64 = q.iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in rest[0].iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    CMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Uniform point on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> nalgebra::Vector3<f64> {
    loop {
        let v = nalgebra::Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}
