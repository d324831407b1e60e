//! Dense complex linear algebra shared by every other module.
//!
//! Everything is a thin layer over `nalgebra` dynamic matrices with
//! `Complex64` entries.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Algebraic identities (unitarity, homomorphism, reconstruction).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Eigenvalues above `-EIGEN_TOL` count as nonnegative.
pub const EIGEN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Kronecker product of a list of matrices, left to right. The empty list
/// yields the 1×1 identity.
pub fn kron_all<'a, I>(parts: I) -> CMatrix
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    parts
        .into_iter()
        .fold(identity(1), |acc, m| acc.kronecker(m))
}

pub fn kron_vectors<'a, I>(parts: I) -> CVector
where
    I: IntoIterator<Item = &'a CVector>,
{
    parts
        .into_iter()
        .fold(CVector::from_element(1, ONE), |acc, v| acc.kronecker(v))
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVector, b: &CVector) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖U†U − 1‖` measured as the largest entry deviation.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix. The input is symmetrized
/// first so round-off in the lower triangle cannot leak in.
pub fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    SymmetricEigen::new(sym)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = hermitian_eigen(m).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Principal square root of a positive semidefinite Hermitian matrix;
/// eigenvalues below zero are clipped.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = hermitian_eigen(m);
    let vecs = &eig.eigenvectors;
    let roots = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)),
    );
    vecs * CMatrix::from_diagonal(&roots) * vecs.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Row-major strides for a list of factor dimensions.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * dims[i + 1];
    }
    out
}

/// Splits a flat index into per-factor labels (row-major).
pub fn unflatten(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut labels = vec![0; dims.len()];
    for (slot, &d) in labels.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    labels
}

pub fn flatten(labels: &[usize], dims: &[usize]) -> usize {
    labels
        .iter()
        .zip(dims)
        .fold(0, |acc, (&l, &d)| acc * d + l)
}

/// Permutation matrix that reorders tensor factors: output factor `i` is
/// input factor `order[i]`.
pub fn factor_permutation(dims: &[usize], order: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let mut p = CMatrix::zeros(total, total);
    for src in 0..total {
        let labels = unflatten(src, dims);
        let out_labels: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
        p[(flatten(&out_labels, &out_dims), src)] = ONE;
    }
    p
}

/// Rotates `v` by a global phase so its first significant entry is real and
/// positive. Entries smaller than `1e-9 · max|v_i|` are skipped.
pub fn fix_global_phase(v: &CVector) -> CVector {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return v.clone();
    }
    match v.iter().find(|z| z.norm() > 1e-9 * scale) {
        Some(z) => v * (z.conj() / z.norm()),
        None => v.clone(),
    }
}

/// `1 − |⟨a|b⟩|` for normalized vectors; zero iff equal up to phase.
pub fn phase_insensitive_distance(a: &CVector, b: &CVector) -> f64 {
    1.0 - a.dotc(b).norm()
}
