//! State vectors and density operators over a declared tensor factorization.
//!
//! Flattening is row-major over the factors in spec order, and reference
//! factors always precede physical ones. States compare equal up to a
//! global phase.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector, ALGEBRA_TOL, EIGEN_TOL, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("invalid factor specification: {0}")]
    InvalidSpec(String),
    #[error("label {label} out of range for factor {position} of dimension {dim}")]
    LabelOutOfRange { position: usize, label: usize, dim: usize },
    #[error("expected {expected} labels, got {got}")]
    TupleLengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tensor product of an empty list")]
    EmptyInput,
    #[error("partial trace must keep at least one factor")]
    EmptyKeepSet,
    #[error("factor position {position} out of range (spec has {len} factors)")]
    InvalidPosition { position: usize, len: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("density operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("density operator has negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("density operator trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("malformed document: {0}")]
    Malformed(String),
}

/// Whether a factor serves as a reference frame or as a described system.
/// Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Reference(usize),
    Physical(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub dim: usize,
    pub role: Role,
}

/// Ordered tensor factorization of a Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct FactorSpec {
    factors: Vec<Factor>,
}

impl TryFrom<Vec<Factor>> for FactorSpec {
    type Error = HilbertError;

    fn try_from(factors: Vec<Factor>) -> Result<Self, Self::Error> {
        Self::new(factors)
    }
}

impl From<FactorSpec> for Vec<Factor> {
    fn from(spec: FactorSpec) -> Self {
        spec.factors
    }
}

impl FactorSpec {
    /// Checks positive dimensions, unique role indices, and that every
    /// reference factor precedes every physical one.
    pub fn new(factors: Vec<Factor>) -> Result<Self, HilbertError> {
        let mut refs = BTreeSet::new();
        let mut phys = BTreeSet::new();
        let mut seen_physical = false;
        for (pos, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(HilbertError::InvalidSpec(format!("factor {pos} has dimension 0")));
            }
            let fresh = match f.role {
                Role::Reference(k) => {
                    if seen_physical {
                        return Err(HilbertError::InvalidSpec(format!(
                            "reference factor {k} listed after a physical factor"
                        )));
                    }
                    k >= 1 && refs.insert(k)
                }
                Role::Physical(j) => {
                    seen_physical = true;
                    j >= 1 && phys.insert(j)
                }
            };
            if !fresh {
                return Err(HilbertError::InvalidSpec(format!(
                    "factor {pos} has a zero or duplicate role index {:?}",
                    f.role
                )));
            }
        }
        Ok(Self { factors })
    }

    /// `frames` reference factors of dimension `group_order`, then one
    /// physical factor per entry of `physical_dims`.
    pub fn frames_then_physical(group_order: usize, frames: usize, physical_dims: &[usize]) -> Self {
        let factors = (1..=frames)
            .map(|k| Factor { dim: group_order, role: Role::Reference(k) })
            .chain(
                physical_dims
                    .iter()
                    .enumerate()
                    .map(|(j, &dim)| Factor { dim, role: Role::Physical(j + 1) }),
            )
            .collect();
        Self::new(factors).expect("well-formed by construction")
    }

    pub fn physical(dims: &[usize]) -> Self {
        Self::frames_then_physical(1, 0, dims)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn reference_positions(&self) -> Vec<usize> {
        self.positions_where(|r| matches!(r, Role::Reference(_)))
    }

    pub fn physical_positions(&self) -> Vec<usize> {
        self.positions_where(|r| matches!(r, Role::Physical(_)))
    }

    fn positions_where(&self, pred: impl Fn(Role) -> bool) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| pred(f.role))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn frame_count(&self) -> usize {
        self.reference_positions().len()
    }

    /// Dimension of the reference sector (product of reference factors).
    pub fn reference_dim(&self) -> usize {
        self.reference_positions().iter().map(|&p| self.factors[p].dim).product()
    }

    pub fn physical_dim(&self) -> usize {
        self.physical_positions().iter().map(|&p| self.factors[p].dim).product()
    }

    pub fn position_of(&self, role: Role) -> Option<usize> {
        self.factors.iter().position(|f| f.role == role)
    }

    /// Spec restricted to the given positions, kept in their original order.
    pub fn restrict(&self, positions: &[usize]) -> Result<Self, HilbertError> {
        let sorted = self.check_positions(positions)?;
        Self::new(sorted.iter().map(|&p| self.factors[p]).collect())
    }

    pub fn concat(&self, other: &FactorSpec) -> Result<Self, HilbertError> {
        Self::new(self.factors.iter().chain(&other.factors).copied().collect())
    }

    /// Validates, sorts and dedups a set of positions.
    pub(crate) fn check_positions(&self, positions: &[usize]) -> Result<Vec<usize>, HilbertError> {
        let set: BTreeSet<usize> = positions.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&p| p >= self.len()) {
            return Err(HilbertError::InvalidPosition { position: bad, len: self.len() });
        }
        Ok(set.into_iter().collect())
    }
}

/// Rearranges a flat vector into the matrix `M[a, b]` with `a` ranging over
/// the `rows` factors and `b` over the rest (both in spec order).
pub(crate) fn reshape_by_factors(amps: &CVector, dims: &[usize], rows: &[usize]) -> CMatrix {
    let cols: Vec<usize> = (0..dims.len()).filter(|p| !rows.contains(p)).collect();
    let row_dims: Vec<usize> = rows.iter().map(|&p| dims[p]).collect();
    let col_dims: Vec<usize> = cols.iter().map(|&p| dims[p]).collect();
    let nr: usize = row_dims.iter().product();
    let nc: usize = col_dims.iter().product();
    let mut m = CMatrix::zeros(nr, nc);
    for (idx, amp) in amps.iter().enumerate() {
        let labels = linalg::unflatten(idx, dims);
        let r: Vec<usize> = rows.iter().map(|&p| labels[p]).collect();
        let cl: Vec<usize> = cols.iter().map(|&p| labels[p]).collect();
        m[(linalg::flatten(&r, &row_dims), linalg::flatten(&cl, &col_dims))] = *amp;
    }
    m
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDoc", into = "StateDoc")]
pub struct PureState {
    amplitudes: CVector,
    spec: FactorSpec,
}

/// Serialized form of a [`PureState`]: the spec plus `(re, im)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub spec: FactorSpec,
    pub amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<StateDoc> for PureState {
    type Error = HilbertError;

    fn try_from(doc: StateDoc) -> Result<Self, Self::Error> {
        let amps = CVector::from_iterator(
            doc.amplitudes.len(),
            doc.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)),
        );
        PureState::new(amps, doc.spec)
    }
}

impl From<PureState> for StateDoc {
    fn from(s: PureState) -> Self {
        StateDoc {
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
            spec: s.spec,
        }
    }
}

impl PureState {
    pub fn new(amplitudes: CVector, spec: FactorSpec) -> Result<Self, HilbertError> {
        if amplitudes.len() != spec.total_dim() {
            return Err(HilbertError::DimensionMismatch {
                expected: spec.total_dim(),
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(HilbertError::NotNormalized { norm });
        }
        Ok(Self { amplitudes, spec })
    }

    /// Normalizes `amplitudes` first; fails only on zero vectors or
    /// dimension mismatch.
    pub fn normalized(amplitudes: CVector, spec: FactorSpec) -> Result<Self, HilbertError> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::ZeroNorm);
        }
        Self::new(amplitudes / Complex64::new(norm, 0.0), spec)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn into_parts(self) -> (CVector, FactorSpec) {
        (self.amplitudes, self.spec)
    }

    /// Same amplitudes under a different, dimension-compatible spec.
    pub fn with_spec(&self, spec: FactorSpec) -> Result<Self, HilbertError> {
        if spec.dims() != self.spec.dims() {
            return Err(HilbertError::DimensionMismatch {
                expected: self.spec.total_dim(),
                got: spec.total_dim(),
            });
        }
        Ok(Self { amplitudes: self.amplitudes.clone(), spec })
    }

    /// `|⟨self|other⟩|`, one iff the states agree up to a global phase.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }

    /// Largest amplitude deviation after aligning global phases.
    pub fn distance_up_to_phase(&self, other: &PureState) -> f64 {
        let a = linalg::fix_global_phase(&self.amplitudes);
        let b = linalg::fix_global_phase(&other.amplitudes);
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        linalg::max_abs_diff_vec(&a, &b)
    }

    pub fn to_density(&self) -> DensityOp {
        DensityOp {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            spec: self.spec.clone(),
        }
    }

    /// Reduced density operator on `keep`, computed as `M M†` of the
    /// reshaped amplitude matrix.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOp, HilbertError> {
        if keep.is_empty() {
            return Err(HilbertError::EmptyKeepSet);
        }
        let keep = self.spec.check_positions(keep)?;
        let m = reshape_by_factors(&self.amplitudes, &self.spec.dims(), &keep);
        Ok(DensityOp { matrix: &m * m.adjoint(), spec: self.spec.restrict(&keep)? })
    }

    /// Reduced state on the physical sector.
    pub fn physical_density(&self) -> Result<DensityOp, HilbertError> {
        self.reduced(&self.spec.physical_positions())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, HilbertError> {
        serde_json::from_str(text).map_err(|e| HilbertError::Malformed(e.to_string()))
    }
}

/// Computational basis vector for the given per-factor labels.
pub fn basis_state(spec: &FactorSpec, labels: &[usize]) -> Result<PureState, HilbertError> {
    let dims = spec.dims();
    if labels.len() != dims.len() {
        return Err(HilbertError::TupleLengthMismatch { expected: dims.len(), got: labels.len() });
    }
    for (position, (&label, &dim)) in labels.iter().zip(&dims).enumerate() {
        if label >= dim {
            return Err(HilbertError::LabelOutOfRange { position, label, dim });
        }
    }
    let mut amps = CVector::zeros(spec.total_dim());
    amps[linalg::flatten(labels, &dims)] = ONE;
    PureState::new(amps, spec.clone())
}

/// Kronecker product of the parts in argument order.
pub fn tensor(parts: &[PureState]) -> Result<PureState, HilbertError> {
    let (first, rest) = parts.split_first().ok_or(HilbertError::EmptyInput)?;
    let mut spec = first.spec.clone();
    let mut amps = first.amplitudes.clone();
    for p in rest {
        spec = spec.concat(&p.spec)?;
        amps = amps.kronecker(&p.amplitudes);
    }
    PureState::normalized(amps, spec)
}

/// Validated density operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityDoc", into = "DensityDoc")]
pub struct DensityOp {
    matrix: CMatrix,
    spec: FactorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityDoc {
    pub spec: FactorSpec,
    /// Row-major `(re, im)` entries.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<DensityDoc> for DensityOp {
    type Error = HilbertError;

    fn try_from(doc: DensityDoc) -> Result<Self, Self::Error> {
        let m = matrix_from_rows(&doc.matrix)?;
        DensityOp::new(m, doc.spec)
    }
}

impl From<DensityOp> for DensityDoc {
    fn from(d: DensityOp) -> Self {
        DensityDoc { matrix: matrix_to_rows(&d.matrix), spec: d.spec }
    }
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, HilbertError> {
    let n = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(HilbertError::Malformed(format!(
            "ragged matrix: row of length {} in a matrix with {ncols} columns",
            bad.len()
        )));
    }
    Ok(CMatrix::from_fn(n, ncols, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    }))
}

impl DensityOp {
    pub fn new(matrix: CMatrix, spec: FactorSpec) -> Result<Self, HilbertError> {
        let n = spec.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(HilbertError::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        let residual = linalg::hermiticity_residual(&matrix);
        if residual > ALGEBRA_TOL {
            return Err(HilbertError::NotHermitian { residual });
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > ALGEBRA_TOL {
            return Err(HilbertError::BadTrace { trace: tr });
        }
        let min_eigenvalue = linalg::hermitian_eigenvalues(&matrix)
            .last()
            .copied()
            .unwrap_or(0.0);
        if min_eigenvalue < -EIGEN_TOL {
            return Err(HilbertError::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix, spec })
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving
    /// operation on valid inputs.
    pub(crate) fn from_trusted(matrix: CMatrix, spec: FactorSpec) -> Self {
        debug_assert_eq!(matrix.nrows(), spec.total_dim());
        Self { matrix, spec }
    }

    /// Convex mixture `Σ p_i ρ_i`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, DensityOp)]) -> Result<Self, HilbertError> {
        let (_, first) = parts.first().ok_or(HilbertError::EmptyInput)?;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (p, rho) in parts {
            if rho.spec.dims() != first.spec.dims() {
                return Err(HilbertError::DimensionMismatch { expected: first.dim(), got: rho.dim() });
            }
            m += &rho.matrix * Complex64::new(*p, 0.0);
        }
        Self::new(m, first.spec.clone())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn physical_density(&self) -> Result<DensityOp, HilbertError> {
        partial_trace(self, &self.spec.physical_positions())
    }

    /// `ρ_a ⊗ ρ_b`, specs concatenated.
    pub fn tensor(&self, other: &DensityOp) -> Result<DensityOp, HilbertError> {
        Ok(Self::from_trusted(
            self.matrix.kronecker(&other.matrix),
            self.spec.concat(&other.spec)?,
        ))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("density serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, HilbertError> {
        serde_json::from_str(text).map_err(|e| HilbertError::Malformed(e.to_string()))
    }
}

/// Either kind of state, for operations that accept both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnyState {
    Pure(PureState),
    Mixed(DensityOp),
}

impl AnyState {
    pub fn dim(&self) -> usize {
        match self {
            AnyState::Pure(p) => p.dim(),
            AnyState::Mixed(m) => m.dim(),
        }
    }

    pub fn spec(&self) -> &FactorSpec {
        match self {
            AnyState::Pure(p) => p.spec(),
            AnyState::Mixed(m) => m.spec(),
        }
    }

    pub fn to_density(&self) -> DensityOp {
        match self {
            AnyState::Pure(p) => p.to_density(),
            AnyState::Mixed(m) => m.clone(),
        }
    }
}

/// Traces out every factor not listed in `keep`.
pub fn partial_trace(rho: &DensityOp, keep: &[usize]) -> Result<DensityOp, HilbertError> {
    if keep.is_empty() {
        return Err(HilbertError::EmptyKeepSet);
    }
    let keep = rho.spec.check_positions(keep)?;
    let dims = rho.spec.dims();
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&p| dims[p]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&p| dims[p]).collect();
    let nk: usize = keep_dims.iter().product();
    let nt: usize = traced_dims.iter().product();

    let full_index = |kept: usize, tr: usize| {
        let kl = linalg::unflatten(kept, &keep_dims);
        let tl = linalg::unflatten(tr, &traced_dims);
        let mut labels = vec![0; dims.len()];
        for (&p, &l) in keep.iter().zip(&kl) {
            labels[p] = l;
        }
        for (&p, &l) in traced.iter().zip(&tl) {
            labels[p] = l;
        }
        linalg::flatten(&labels, &dims)
    };
    let index: Vec<Vec<usize>> = (0..nk)
        .map(|k| (0..nt).map(|t| full_index(k, t)).collect())
        .collect();

    let mut out = CMatrix::zeros(nk, nk);
    for i in 0..nk {
        for j in 0..nk {
            out[(i, j)] = (0..nt)
                .map(|t| rho.matrix[(index[i][t], index[j][t])])
                .fold(ZERO, |a, b| a + b);
        }
    }
    Ok(DensityOp::from_trusted(out, rho.spec.restrict(&keep)?))
}

/// One term `f(g⃗) |g⃗⟩ ⊗ ψ(g⃗)` of the conditional decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEntry {
    pub tuple: Vec<usize>,
    pub weight: Complex64,
    /// `None` when the weight vanishes.
    pub state: Option<PureState>,
}

/// Expansion of a state over reference-sector basis tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDecomposition {
    pub entries: Vec<ConditionalEntry>,
    reference_spec: FactorSpec,
    physical_spec: FactorSpec,
}

/// Weights below this magnitude are treated as exactly zero.
pub const NULL_WEIGHT: f64 = 1e-14;

/// Projects `psi` onto the reference basis tuple `gvec` and splits the
/// result into a complex weight and a normalized physical state.
///
/// The weight carries the phase of the first significant component of the
/// projected block, so that `weight · state` is exactly the block.
pub fn conditional_state(
    psi: &PureState,
    gvec: &[usize],
) -> Result<(Complex64, Option<PureState>), HilbertError> {
    let refs = psi.spec.reference_positions();
    if refs.is_empty() || gvec.len() != refs.len() {
        return Err(HilbertError::TupleLengthMismatch { expected: refs.len(), got: gvec.len() });
    }
    let ref_dims: Vec<usize> = refs.iter().map(|&p| psi.spec.factors[p].dim).collect();
    for (position, (&label, &dim)) in gvec.iter().zip(&ref_dims).enumerate() {
        if label >= dim {
            return Err(HilbertError::LabelOutOfRange { position, label, dim });
        }
    }
    let phys_spec = psi.spec.restrict(&psi.spec.physical_positions())?;
    let block_len = phys_spec.total_dim();
    let offset = linalg::flatten(gvec, &ref_dims) * block_len;
    let block = psi.amplitudes.rows(offset, block_len).into_owned();
    Ok(split_block(block, phys_spec))
}

fn split_block(block: CVector, spec: FactorSpec) -> (Complex64, Option<PureState>) {
    let norm = block.norm();
    if norm <= NULL_WEIGHT {
        return (ZERO, None);
    }
    let scale = block.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = block
        .iter()
        .find(|z| z.norm() > 1e-9 * scale)
        .copied()
        .unwrap_or(ONE);
    let weight = Complex64::from_polar(norm, lead.arg());
    let state = PureState::new(block / weight, spec).expect("unit norm by construction");
    (weight, Some(state))
}

impl ConditionalDecomposition {
    pub fn of(psi: &PureState) -> Result<Self, HilbertError> {
        let refs = psi.spec.reference_positions();
        if refs.is_empty() {
            return Err(HilbertError::TupleLengthMismatch { expected: 1, got: 0 });
        }
        let reference_spec = psi.spec.restrict(&refs)?;
        let physical_spec = psi.spec.restrict(&psi.spec.physical_positions())?;
        let ref_dims = reference_spec.dims();
        let entries = (0..reference_spec.total_dim())
            .map(|r| {
                let tuple = linalg::unflatten(r, &ref_dims);
                let (weight, state) = conditional_state(psi, &tuple)?;
                Ok(ConditionalEntry { tuple, weight, state })
            })
            .collect::<Result<_, HilbertError>>()?;
        Ok(Self { entries, reference_spec, physical_spec })
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight.norm_sqr()).sum()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&[usize], Complex64, &PureState)> {
        self.entries
            .iter()
            .filter_map(|e| e.state.as_ref().map(|s| (e.tuple.as_slice(), e.weight, s)))
    }

    /// `Σ f(g⃗) |g⃗⟩ ⊗ ψ(g⃗)`, as an unnormalized vector.
    pub fn reconstruct(&self) -> CVector {
        let block = self.physical_spec.total_dim();
        let mut out = CVector::zeros(self.reference_spec.total_dim() * block);
        let ref_dims = self.reference_spec.dims();
        for (tuple, weight, state) in self.nonzero() {
            let offset = linalg::flatten(tuple, &ref_dims) * block;
            out.rows_mut(offset, block)
                .copy_from(&(state.amplitudes() * weight));
        }
        out
    }
}
