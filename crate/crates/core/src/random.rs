//! Seeded sampling of states, unitaries and density operators.
//!
//! Amplitudes are complex Gaussians normalized afterwards, which is Haar
//! uniform on the unit sphere. Every randomized trial draws from its own
//! ChaCha stream keyed by `(seed, trial)`, so results do not depend on how
//! trials are scheduled.

use nalgebra::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector};

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut impl Rng, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| gaussian(rng))
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn random_pure(rng: &mut impl Rng, dim: usize) -> CVector {
    let v = gaussian_vector(rng, dim);
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Tensor product of independent Haar-random factors.
pub fn random_product(rng: &mut impl Rng, dims: &[usize]) -> CVector {
    let parts: Vec<CVector> = dims.iter().map(|&d| random_pure(rng, d)).collect();
    linalg::kron_vectors(&parts)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phases of
/// `R`'s diagonal folded back into `Q`.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let qr = QR::new(ginibre(rng, dim, dim));
    let (q, r) = qr.unpack();
    let phases = CVector::from_iterator(
        dim,
        r.diagonal().iter().map(|z| if z.norm() > 0.0 { z / z.norm() } else { linalg::ONE }),
    );
    q * CMatrix::from_diagonal(&phases)
}

/// `⊗_j U_j` with independent Haar factors.
pub fn random_local_unitary(rng: &mut impl Rng, dims: &[usize]) -> CMatrix {
    let parts: Vec<CMatrix> = dims.iter().map(|&d| random_unitary(rng, d)).collect();
    linalg::kron_all(&parts)
}

/// Random density matrix of rank at most `rank`: `G G† / tr(G G†)`.
pub fn random_density(rng: &mut impl Rng, dim: usize, rank: usize) -> CMatrix {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m);
    m / tr
}

/// Random probability vector with `n` entries (normalized exponentials).
pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Mixture of `terms` random product projectors over `dims`.
pub fn random_separable_density(rng: &mut impl Rng, dims: &[usize], terms: usize) -> CMatrix {
    let dim: usize = dims.iter().product();
    let weights = random_weights(rng, terms.max(1));
    let mut m = CMatrix::zeros(dim, dim);
    for w in weights {
        let v = random_product(rng, dims);
        m += (&v * v.adjoint()) * Complex64::new(w, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).random()).collect();
        assert_eq!(a, b);
        let x: u64 = trial_rng(7, 3).random();
        let y: u64 = trial_rng(7, 4).random();
        let z: u64 = trial_rng(8, 3).random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn samples_have_expected_structure() {
        let mut rng = trial_rng(1, 0);
        assert!((random_pure(&mut rng, 7).norm() - 1.0).abs() < 1e-14);
        assert!((random_product(&mut rng, &[2, 3]).norm() - 1.0).abs() < 1e-14);
        for d in [1, 2, 5] {
            assert!(linalg::unitarity_residual(&random_unitary(&mut rng, d)) < 1e-12);
        }
        let rho = random_density(&mut rng, 4, 2);
        assert!((linalg::trace(&rho).re - 1.0).abs() < 1e-14);
        let eig = linalg::hermitian_eigenvalues(&rho);
        assert!(eig.iter().all(|&v| v > -1e-12));
        assert_eq!(eig.iter().filter(|&&v| v > 1e-10).count(), 2);
        let w = random_weights(&mut rng, 5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let sep = random_separable_density(&mut rng, &[2, 2], 3);
        assert!((linalg::trace(&sep).re - 1.0).abs() < 1e-14);
    }
}
