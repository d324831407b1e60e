//! Separability and entanglement diagnostics.
//!
//! Pure states are tested for full product structure through single-factor
//! purities. Mixed states get the partial-transpose test and its negativity,
//! plus the Wootters concurrence on two qubits.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{reshape_by_factors, DensityOp, FactorSpec, PureState};
use crate::linalg::{self, CMatrix, EIGEN_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),
    #[error("concurrence needs two qubits, got factor dims {0:?}")]
    NotTwoQubit(Vec<usize>),
}

/// Split of factor positions into two nonempty complementary sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut side_a: Vec<usize>, mut side_b: Vec<usize>) -> Result<Self, EntanglementError> {
        side_a.sort_unstable();
        side_b.sort_unstable();
        if side_a.is_empty() || side_b.is_empty() {
            return Err(EntanglementError::InvalidBipartition("empty side".into()));
        }
        let mut all: Vec<usize> = side_a.iter().chain(&side_b).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(EntanglementError::InvalidBipartition("sides overlap".into()));
        }
        Ok(Self { side_a, side_b })
    }

    /// `side_a` against everything else among `factors` positions.
    pub fn complement(side_a: Vec<usize>, factors: usize) -> Result<Self, EntanglementError> {
        if let Some(&p) = side_a.iter().find(|&&p| p >= factors) {
            return Err(EntanglementError::InvalidBipartition(format!(
                "position {p} out of range for {factors} factors"
            )));
        }
        let side_b = (0..factors).filter(|p| !side_a.contains(p)).collect();
        Self::new(side_a, side_b)
    }

    /// Every unordered cut of `factors` positions, each listed once with
    /// position 0 on side A.
    pub fn all(factors: usize) -> Vec<Self> {
        if factors < 2 {
            return Vec::new();
        }
        let rest = factors - 1;
        (0..(1usize << rest) - 1)
            .map(|mask| {
                let mut a = vec![0];
                let mut b = Vec::new();
                for p in 1..factors {
                    if mask >> (p - 1) & 1 == 1 {
                        a.push(p);
                    } else {
                        b.push(p);
                    }
                }
                Self { side_a: a, side_b: b }
            })
            .collect()
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    fn check_covers(&self, spec: &FactorSpec) -> Result<(), EntanglementError> {
        let n = spec.len();
        if self.side_a.len() + self.side_b.len() != n
            || self.side_a.iter().chain(&self.side_b).any(|&p| p >= n)
        {
            return Err(EntanglementError::InvalidBipartition(format!(
                "{self} does not cover the {n} factors of the state"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &[usize]| s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", join(&self.side_a), join(&self.side_b))
    }
}

/// Schmidt coefficients across `cut`, in descending order.
pub fn schmidt_coefficients(psi: &PureState, cut: &Bipartition) -> Result<Vec<f64>, EntanglementError> {
    cut.check_covers(psi.spec())?;
    let m = reshape_by_factors(psi.amplitudes(), &psi.spec().dims(), cut.side_a());
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Purity of the reduced state on the single factor at `position`.
pub fn single_factor_purity(psi: &PureState, position: usize) -> f64 {
    let m = reshape_by_factors(psi.amplitudes(), &psi.spec().dims(), &[position]);
    let rho = &m * m.adjoint();
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Whether `psi` is a product of single-factor states over `factors`:
/// every single-factor reduced state has purity at least `1 - tol`.
/// Out-of-range positions are ignored.
pub fn is_pure_fully_separable(psi: &PureState, factors: &[usize], tol: f64) -> bool {
    factors
        .iter()
        .filter(|&&p| p < psi.spec().len())
        .all(|&p| single_factor_purity(psi, p) >= 1.0 - tol)
}

/// Partial transpose of `rho` on the factors in `side_b`.
pub fn partial_transpose(rho: &CMatrix, dims: &[usize], side_b: &[usize]) -> CMatrix {
    let n = rho.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let li = linalg::unflatten(i, dims);
        for j in 0..n {
            let lj = linalg::unflatten(j, dims);
            let (mut ri, mut rj) = (li.clone(), lj.clone());
            for &p in side_b {
                ri[p] = lj[p];
                rj[p] = li[p];
            }
            out[(linalg::flatten(&ri, dims), linalg::flatten(&rj, dims))] = rho[(i, j)];
        }
    }
    out
}

fn pt_eigenvalues(rho: &DensityOp, cut: &Bipartition) -> Result<Vec<f64>, EntanglementError> {
    cut.check_covers(rho.spec())?;
    let pt = partial_transpose(rho.matrix(), &rho.spec().dims(), cut.side_b());
    Ok(linalg::hermitian_eigenvalues(&pt))
}

/// Sum of the magnitudes of the negative partial-transpose eigenvalues.
/// Eigenvalues within `1e-10` of zero count as nonnegative.
pub fn negativity(rho: &DensityOp, cut: &Bipartition) -> Result<f64, EntanglementError> {
    Ok(pt_eigenvalues(rho, cut)?
        .into_iter()
        .filter(|&v| v < -EIGEN_TOL)
        .fold(0.0, |acc, v| acc - v))
}

/// Largest negativity over every cut of the state's factors.
pub fn max_negativity(rho: &DensityOp) -> f64 {
    Bipartition::all(rho.spec().len())
        .iter()
        .map(|cut| negativity(rho, cut).unwrap_or(0.0))
        .fold(0.0, f64::max)
}

/// Wootters concurrence of a two-qubit density operator.
///
/// With `ρ = W W†` (columns `√p_i |v_i⟩`), the spin-flip spectrum values
/// `λ_i` are the singular values of `Wᵀ (σ_y ⊗ σ_y) W`. This avoids taking
/// square roots of round-off-level eigenvalues.
pub fn concurrence(rho: &DensityOp) -> Result<f64, EntanglementError> {
    let dims = rho.spec().dims();
    if dims != [2, 2] {
        return Err(EntanglementError::NotTwoQubit(dims));
    }
    let eig = linalg::hermitian_eigen(rho.matrix());
    let mut w = eig.eigenvectors.clone();
    for (j, &p) in eig.eigenvalues.iter().enumerate() {
        let scale = linalg::c(p.max(0.0).sqrt(), 0.0);
        w.column_mut(j).scale_mut(scale.re);
    }
    let yy = linalg::kron_all(&[linalg::sigma_y(), linalg::sigma_y()]);
    let tau = w.transpose() * yy * &w;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Outcome of the partial-transpose test for one cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PptVerdict {
    /// Negative partial transpose: entangled for any dimensions.
    Entangled,
    /// PPT on a 2×2 or 2×3 cut, where PPT implies separability.
    Separable,
    /// PPT elsewhere; separability is not certified.
    PptOnly,
}

impl fmt::Display for PptVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PptVerdict::Entangled => "entangled",
            PptVerdict::Separable => "separable",
            PptVerdict::PptOnly => "PPT (necessary only)",
        })
    }
}

pub fn ppt_verdict(rho: &DensityOp, cut: &Bipartition, tol: f64) -> Result<PptVerdict, EntanglementError> {
    if negativity(rho, cut)? > tol {
        return Ok(PptVerdict::Entangled);
    }
    let dims = rho.spec().dims();
    let da: usize = cut.side_a().iter().map(|&p| dims[p]).product();
    let db: usize = cut.side_b().iter().map(|&p| dims[p]).product();
    let (lo, hi) = (da.min(db), da.max(db));
    Ok(if lo == 1 || (lo == 2 && hi <= 3) { PptVerdict::Separable } else { PptVerdict::PptOnly })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_state, FactorSpec};
    use crate::linalg::{c, CVector, ZERO};
    use crate::random;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn qubits(n: usize) -> FactorSpec {
        FactorSpec::physical(&vec![2; n])
    }

    fn bell_plus_i() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![c(h, 0.0), ZERO, ZERO, c(0.0, h)]);
        PureState::new(v, qubits(2)).unwrap()
    }

    fn ab() -> Bipartition {
        Bipartition::complement(vec![0], 2).unwrap()
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(vec![], vec![0]).is_err());
        assert!(Bipartition::new(vec![0, 1], vec![1]).is_err());
        assert!(Bipartition::complement(vec![0, 1], 2).is_err());
        assert!(Bipartition::complement(vec![3], 2).is_err());
        assert_eq!(Bipartition::all(1).len(), 0);
        assert_eq!(Bipartition::all(2).len(), 1);
        assert_eq!(Bipartition::all(3).len(), 3);
        assert_eq!(Bipartition::all(4).len(), 7);
        let psi = bell_plus_i();
        let wrong = Bipartition::complement(vec![0], 3).unwrap();
        assert!(matches!(
            schmidt_coefficients(&psi, &wrong),
            Err(EntanglementError::InvalidBipartition(_))
        ));
    }

    #[test]
    fn schmidt_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus0 = PureState::new(CVector::from_vec(vec![c(h, 0.0), ZERO, c(h, 0.0), ZERO]), qubits(2)).unwrap();
        let s = schmidt_coefficients(&plus0, &ab()).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && s[1].abs() < 1e-12);

        let mut ghz = CVector::zeros(8);
        ghz[0] = c(h, 0.0);
        ghz[7] = c(h, 0.0);
        let ghz = PureState::new(ghz, qubits(3)).unwrap();
        let s = schmidt_coefficients(&ghz, &Bipartition::complement(vec![0], 3).unwrap()).unwrap();
        // 2x4 reshape has rows (h,0,0,0) and (0,0,0,h): orthogonal with norm h each.
        assert!((s[0] - h).abs() < 1e-12 && (s[1] - h).abs() < 1e-12);
        let total: f64 = s.iter().map(|x| x * x).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separability_examples() {
        let zz = basis_state(&qubits(2), &[0, 0]).unwrap();
        assert!(is_pure_fully_separable(&zz, &[0, 1], 1e-9));
        assert!(!is_pure_fully_separable(&bell_plus_i(), &[0, 1], 1e-9));

        let mut rng = random::trial_rng(5, 0);
        let prod = PureState::new(random::random_product(&mut rng, &[2, 3, 2]), FactorSpec::physical(&[2, 3, 2])).unwrap();
        assert!(is_pure_fully_separable(&prod, &[0, 1, 2], 1e-9));
        // CNOT from factor 0 onto factor 2 (dims 2,3,2) on a state with |+> first.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let first = CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]);
        let rest = random::random_product(&mut rng, &[3, 2]);
        let v = linalg::kron_vectors(&[first, rest]);
        let dims = [2, 3, 2];
        let mut w = CVector::zeros(12);
        for i in 0..12 {
            let mut l = linalg::unflatten(i, &dims);
            if l[0] == 1 {
                l[2] ^= 1;
            }
            w[linalg::flatten(&l, &dims)] = v[i];
        }
        let ent = PureState::new(w, FactorSpec::physical(&dims)).unwrap();
        let s = schmidt_coefficients(&ent, &Bipartition::complement(vec![0], 3).unwrap()).unwrap();
        assert!(s[1] > 1e-6);
        assert!(!is_pure_fully_separable(&ent, &[0, 1, 2], 1e-9));
    }

    #[test]
    fn negativity_examples() {
        let rho = bell_plus_i().to_density();
        // Independent partial transpose: |00><11| coefficient -i/2 moves to |01><10|.
        let h = 0.5;
        let mut pt = CMatrix::zeros(4, 4);
        pt[(0, 0)] = c(h, 0.0);
        pt[(3, 3)] = c(h, 0.0);
        pt[(1, 2)] = c(0.0, -h);
        pt[(2, 1)] = c(0.0, h);
        assert!(linalg::max_abs_diff(&partial_transpose(rho.matrix(), &[2, 2], &[1]), &pt) < 1e-15);
        // Its middle block [[0,-i/2],[i/2,0]] has eigenvalues ±1/2.
        assert!((negativity(&rho, &ab()).unwrap() - 0.5).abs() < 1e-12);

        let prod = basis_state(&qubits(2), &[1, 0]).unwrap().to_density();
        assert!(negativity(&prod, &ab()).unwrap() < 1e-12);

        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        let classical = DensityOp::new(m, qubits(2)).unwrap();
        assert!(negativity(&classical, &ab()).unwrap() < 1e-12);
        assert_eq!(ppt_verdict(&classical, &ab(), 1e-9).unwrap(), PptVerdict::Separable);
        assert_eq!(ppt_verdict(&rho, &ab(), 1e-9).unwrap(), PptVerdict::Entangled);
    }

    #[test]
    fn ppt_verdict_is_conservative_beyond_small_dims() {
        let spec = FactorSpec::physical(&[3, 3]);
        let rho = DensityOp::new(linalg::identity(9) * c(1.0 / 9.0, 0.0), spec).unwrap();
        let cut = Bipartition::complement(vec![0], 2).unwrap();
        assert_eq!(ppt_verdict(&rho, &cut, 1e-9).unwrap(), PptVerdict::PptOnly);
        assert_eq!(PptVerdict::PptOnly.to_string(), "PPT (necessary only)");
        let spec = FactorSpec::physical(&[2, 3]);
        let rho = DensityOp::new(linalg::identity(6) * c(1.0 / 6.0, 0.0), spec).unwrap();
        assert_eq!(ppt_verdict(&rho, &cut, 1e-9).unwrap(), PptVerdict::Separable);
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&bell_plus_i().to_density()).unwrap() - 1.0).abs() < 1e-9);
        assert!(concurrence(&basis_state(&qubits(2), &[0, 1]).unwrap().to_density()).unwrap() < 1e-9);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        assert!(concurrence(&DensityOp::new(m, qubits(2)).unwrap()).unwrap() < 1e-9);
        let q3 = FactorSpec::physical(&[2, 3]);
        let rho = DensityOp::new(linalg::identity(6) * c(1.0 / 6.0, 0.0), q3).unwrap();
        assert!(matches!(concurrence(&rho), Err(EntanglementError::NotTwoQubit(_))));
    }

    fn density(m: CMatrix, dims: &[usize]) -> DensityOp {
        DensityOp::new(m, FactorSpec::physical(dims)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pure_concurrence_matches_closed_form(seed in any::<u64>()) {
            let mut rng = random::trial_rng(seed, 0);
            let v = random::random_pure(&mut rng, 4);
            let oracle = 2.0 * (v[0] * v[3] - v[1] * v[2]).norm();
            let psi = PureState::new(v, qubits(2)).unwrap();
            prop_assert!((concurrence(&psi.to_density()).unwrap() - oracle).abs() < 1e-7);
        }

        #[test]
        fn separability_iff_trivial_schmidt(seed in any::<u64>(), product in any::<bool>()) {
            let mut rng = random::trial_rng(seed, 1);
            let dims = [2, 3, 2];
            let v = if product { random::random_product(&mut rng, &dims) } else { random::random_pure(&mut rng, 12) };
            let psi = PureState::new(v, FactorSpec::physical(&dims)).unwrap();
            let trivial = (0..3).all(|p| {
                let s = schmidt_coefficients(&psi, &Bipartition::complement(vec![p], 3).unwrap()).unwrap();
                (s[0] - 1.0).abs() < 1e-9
            });
            prop_assert_eq!(is_pure_fully_separable(&psi, &[0, 1, 2], 1e-9), trivial);
            prop_assert_eq!(trivial, product);
        }

        #[test]
        fn negativity_local_unitary_invariance(seed in any::<u64>(), rank in 1usize..4) {
            let mut rng = random::trial_rng(seed, 2);
            let dims = [2, 3];
            let rho = random::random_density(&mut rng, 6, rank);
            let u = random::random_local_unitary(&mut rng, &dims);
            let rotated = &u * &rho * u.adjoint();
            let cut = Bipartition::complement(vec![0], 2).unwrap();
            let n0 = negativity(&density(rho, &dims), &cut).unwrap();
            let n1 = negativity(&density(rotated, &dims), &cut).unwrap();
            prop_assert!((n0 - n1).abs() < 1e-10);
        }

        #[test]
        fn negativity_is_convex(seed in any::<u64>()) {
            let mut rng = random::trial_rng(seed, 3);
            let dims = [2, 2];
            let cut = ab();
            let parts: Vec<CMatrix> = (0..3).map(|_| random::random_density(&mut rng, 4, 1 + (seed as usize % 3))).collect();
            let w = random::random_weights(&mut rng, 3);
            let mut mix = CMatrix::zeros(4, 4);
            let mut bound = 0.0;
            for (p, m) in w.iter().zip(&parts) {
                mix += m * Complex64::new(*p, 0.0);
                bound += p * negativity(&density(m.clone(), &dims), &cut).unwrap();
            }
            prop_assert!(negativity(&density(mix, &dims), &cut).unwrap() <= bound + 1e-10);
        }

        #[test]
        fn concurrence_and_negativity_agree_on_zero(seed in any::<u64>(), rank in 1usize..5) {
            let mut rng = random::trial_rng(seed, 4);
            let rho = density(random::random_density(&mut rng, 4, rank), &[2, 2]);
            let n = negativity(&rho, &ab()).unwrap();
            let cval = concurrence(&rho).unwrap();
            // Away from the boundary both measures must agree on entangled vs not.
            if n > 1e-4 || cval > 1e-4 {
                prop_assert!(n > 1e-10 && cval > 1e-10);
            }
        }

        #[test]
        fn separable_mixtures_are_ppt(seed in any::<u64>()) {
            let mut rng = random::trial_rng(seed, 5);
            let rho = density(random::random_separable_density(&mut rng, &[2, 2], 4), &[2, 2]);
            prop_assert!(negativity(&rho, &ab()).unwrap() < 1e-9);
            prop_assert!(concurrence(&rho).unwrap() < 1e-7);
        }
    }
}
