//! Frame-change operators between `L²(G)` reference frames.
//!
//! Two operators are built here:
//!
//! * the perspectival map `S^{a→b} = Π_{ab} Σ_g 1_a ⊗ |g⁻¹⟩⟨g|_b ⊗ (⊗_{j≠a,b} U_j†(g))`,
//!   a unitary on the full space that includes the relabelling swap;
//! * the passive map `T^{k→l} = Σ_{g⃗: g_k = e} |g_l⁻¹·g⃗⟩⟨g⃗| ⊗ 𝒰†(g_l)`, a
//!   partial isometry from `{g_k = e}` onto `{g_l = e}`. Frame factors keep
//!   their positions; which frame is "current" is metadata on the caller's
//!   side.
//!
//! Both are stored as a list of branches (source reference tuple, target
//! reference tuple, acting group element) together with the dense matrix
//! assembled from those branches. On the domain `{g_k = e}` the two maps
//! coincide.
//!
//! Frame indices are 1-based throughout the public API.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{FiniteGroup, GroupElement, GroupError, GroupSpec};
use crate::hilbert::{self, AnyState, DensityOp, FactorSpec, HilbertError, PureState};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::repr::{self, RepSpec, Representation, ReprError};

/// Largest norm (pure) or trace (mixed) a passive transform tolerates
/// outside its domain.
pub const DOMAIN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QrfError {
    #[error("frame change needs distinct frames, got {0} → {0}")]
    SameFrameIndices(usize),
    #[error("frame index {frame} out of range 1..={frames}")]
    InvalidFrame { frame: usize, frames: usize },
    #[error("configuration needs at least one reference frame")]
    NoFrames,
    #[error("state dimension {got} does not match configuration dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input has norm {leaked:e} outside the transform domain")]
    DomainViolation { leaked: f64 },
    #[error("not a frame part: {0}")]
    NotAFramePart(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Repr(#[from] ReprError),
}

/// Serializable description of a [`FrameConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSpec {
    pub group: GroupSpec,
    pub frames: usize,
    #[serde(default)]
    pub physical: Vec<RepSpec>,
}

impl ConfigSpec {
    pub fn resolve(&self) -> Result<FrameConfig, QrfError> {
        let group = self.group.resolve()?;
        let reps = self
            .physical
            .iter()
            .map(|r| r.resolve(&group))
            .collect::<Result<Vec<_>, _>>()?;
        FrameConfig::new(group, self.frames, reps)
    }
}

/// `m` reference frames carrying the regular representation of `G`,
/// followed by `N` physical systems with their own representations.
#[derive(Debug, Clone)]
pub struct FrameConfig {
    group: FiniteGroup,
    frames: usize,
    physical: Vec<Representation>,
    spec: FactorSpec,
    /// `𝒰†(g)` for every element, indexed by element.
    physical_daggers: Vec<CMatrix>,
}

impl FrameConfig {
    pub fn new(group: FiniteGroup, frames: usize, physical: Vec<Representation>) -> Result<Self, QrfError> {
        if frames == 0 {
            return Err(QrfError::NoFrames);
        }
        if physical.iter().any(|r| r.group() != &group) {
            return Err(ReprError::GroupMismatch.into());
        }
        let dims: Vec<usize> = physical.iter().map(Representation::dim).collect();
        let spec = FactorSpec::frames_then_physical(group.order(), frames, &dims);
        let physical_daggers = group
            .elements()
            .map(|g| repr::combined_action(&physical, g).map(|u| u.adjoint()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { group, frames, physical, spec, physical_daggers })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn physical_reps(&self) -> &[Representation] {
        &self.physical
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn total_dim(&self) -> usize {
        self.spec.total_dim()
    }

    pub fn reference_dim(&self) -> usize {
        self.group.order().pow(self.frames as u32)
    }

    pub fn physical_dim(&self) -> usize {
        self.physical.iter().map(Representation::dim).product()
    }

    pub fn physical_dims(&self) -> Vec<usize> {
        self.physical.iter().map(Representation::dim).collect()
    }

    pub fn reference_spec(&self) -> FactorSpec {
        FactorSpec::frames_then_physical(self.group.order(), self.frames, &[])
    }

    pub fn physical_spec(&self) -> FactorSpec {
        FactorSpec::physical(&self.physical_dims())
    }

    /// `𝒰†(g) = U_1†(g) ⊗ … ⊗ U_N†(g)`.
    pub fn physical_dagger(&self, g: GroupElement) -> &CMatrix {
        &self.physical_daggers[g.index()]
    }

    /// Converts a 1-based frame index into a reference factor position.
    pub fn frame_position(&self, frame: usize) -> Result<usize, QrfError> {
        if frame == 0 || frame > self.frames {
            return Err(QrfError::InvalidFrame { frame, frames: self.frames });
        }
        Ok(frame - 1)
    }

    pub fn ref_tuple(&self, index: usize) -> Vec<GroupElement> {
        linalg::unflatten(index, &vec![self.group.order(); self.frames])
            .into_iter()
            .map(GroupElement)
            .collect()
    }

    pub fn ref_index(&self, tuple: &[GroupElement]) -> usize {
        let labels: Vec<usize> = tuple.iter().map(|g| g.index()).collect();
        linalg::flatten(&labels, &vec![self.group.order(); self.frames])
    }

    /// `g·g⃗`: left multiplication on every reference factor.
    pub fn left_act(&self, g: GroupElement, tuple: &[GroupElement]) -> Vec<GroupElement> {
        tuple.iter().map(|&x| self.group.mul(g, x)).collect()
    }

    /// Reference indices whose frame `frame` sits at the identity.
    pub fn frame_at_identity(&self, frame: usize) -> Result<Vec<bool>, QrfError> {
        let pos = self.frame_position(frame)?;
        let e = self.group.identity();
        Ok((0..self.reference_dim()).map(|r| self.ref_tuple(r)[pos] == e).collect())
    }

    /// Projector onto `{g_frame = e} ⊗ H_phys`.
    pub fn frame_projector(&self, frame: usize) -> Result<CMatrix, QrfError> {
        Ok(mask_projector(&self.frame_at_identity(frame)?, self.physical_dim()))
    }

    fn check_state_dim(&self, dim: usize) -> Result<(), QrfError> {
        if dim != self.total_dim() {
            return Err(QrfError::DimensionMismatch { expected: self.total_dim(), got: dim });
        }
        Ok(())
    }
}

fn mask_projector(mask: &[bool], block: usize) -> CMatrix {
    let diag = CVector::from_iterator(
        mask.len() * block,
        mask.iter().flat_map(|&m| std::iter::repeat_n(if m { ONE } else { ZERO }, block)),
    );
    CMatrix::from_diagonal(&diag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum TransformKind {
    Perspectival { from: usize, to: usize },
    Passive { from: usize, to: usize },
}

impl TransformKind {
    pub fn frames(self) -> (usize, usize) {
        match self {
            TransformKind::Perspectival { from, to } | TransformKind::Passive { from, to } => (from, to),
        }
    }
}

/// Subspace bookkeeping for partial isometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subspace {
    Full,
    FrameAtIdentity(usize),
}

/// `|src⟩ ↦ |dst⟩ ⊗ 𝒰†(element)` on one reference basis tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Branch {
    src: usize,
    dst: usize,
    element: GroupElement,
}

/// An explicit frame-change operator.
#[derive(Debug, Clone)]
pub struct QrfTransform {
    kind: TransformKind,
    spec: FactorSpec,
    domain: Subspace,
    codomain: Subspace,
    domain_mask: Vec<bool>,
    codomain_mask: Vec<bool>,
    branches: Vec<Branch>,
    physical_daggers: Vec<CMatrix>,
    matrix: CMatrix,
}

impl QrfTransform {
    fn assemble(
        config: &FrameConfig,
        kind: TransformKind,
        domain: Subspace,
        codomain: Subspace,
        branches: Vec<Branch>,
    ) -> Result<Self, QrfError> {
        let mask = |s: Subspace| match s {
            Subspace::Full => Ok(vec![true; config.reference_dim()]),
            Subspace::FrameAtIdentity(k) => config.frame_at_identity(k),
        };
        let dp = config.physical_dim();
        let mut matrix = CMatrix::zeros(config.total_dim(), config.total_dim());
        for b in &branches {
            matrix
                .view_mut((b.dst * dp, b.src * dp), (dp, dp))
                .copy_from(config.physical_dagger(b.element));
        }
        Ok(Self {
            kind,
            spec: config.spec.clone(),
            domain,
            codomain,
            domain_mask: mask(domain)?,
            codomain_mask: mask(codomain)?,
            branches,
            physical_daggers: config.physical_daggers.clone(),
            matrix,
        })
    }

    /// The trivial hop `k → k`: the projector onto `{g_k = e}`.
    pub fn trivial(config: &FrameConfig, frame: usize) -> Result<Self, QrfError> {
        let mask = config.frame_at_identity(frame)?;
        let e = config.group.identity();
        let branches = (0..config.reference_dim())
            .filter(|&r| mask[r])
            .map(|r| Branch { src: r, dst: r, element: e })
            .collect();
        Self::assemble(
            config,
            TransformKind::Passive { from: frame, to: frame },
            Subspace::FrameAtIdentity(frame),
            Subspace::FrameAtIdentity(frame),
            branches,
        )
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn domain(&self) -> Subspace {
        self.domain
    }

    pub fn codomain(&self) -> Subspace {
        self.codomain
    }

    fn physical_dim(&self) -> usize {
        self.physical_daggers[0].nrows()
    }

    pub fn domain_projector(&self) -> CMatrix {
        mask_projector(&self.domain_mask, self.physical_dim())
    }

    pub fn codomain_projector(&self) -> CMatrix {
        mask_projector(&self.codomain_mask, self.physical_dim())
    }

    /// `(‖T†T − P_dom‖, ‖TT† − P_cod‖)` as largest entry deviations.
    pub fn isometry_residuals(&self) -> (f64, f64) {
        let t = &self.matrix;
        (
            linalg::max_abs_diff(&(t.adjoint() * t), &self.domain_projector()),
            linalg::max_abs_diff(&(t * t.adjoint()), &self.codomain_projector()),
        )
    }

    /// Norm of the part of `amps` outside the domain.
    fn leaked_norm(&self, amps: &CVector) -> f64 {
        let dp = self.physical_dim();
        self.domain_mask
            .iter()
            .enumerate()
            .filter(|(_, &inside)| !inside)
            .map(|(r, _)| amps.rows(r * dp, dp).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Branch-by-branch application without forming the dense matrix:
    /// permutes reference blocks and applies `𝒰†(g)` inside each.
    /// Components outside the domain are ignored.
    pub fn apply_structured(&self, amps: &CVector) -> CVector {
        let dp = self.physical_dim();
        let mut out = CVector::zeros(amps.len());
        for b in &self.branches {
            let block = &self.physical_daggers[b.element.index()] * amps.rows(b.src * dp, dp);
            out.rows_mut(b.dst * dp, dp).copy_from(&block);
        }
        out
    }

    /// Plain dense matrix-vector product.
    pub fn apply_dense(&self, amps: &CVector) -> CVector {
        &self.matrix * amps
    }

    /// Transforms a pure state. Passive transforms reject inputs with more
    /// than [`DOMAIN_TOL`] norm outside `{g_k = e}`; the output is
    /// renormalized.
    pub fn apply(&self, psi: &PureState) -> Result<PureState, QrfError> {
        self.check_spec(psi.spec())?;
        let leaked = self.leaked_norm(psi.amplitudes());
        if leaked > DOMAIN_TOL {
            return Err(QrfError::DomainViolation { leaked });
        }
        let out = self.apply_structured(psi.amplitudes());
        Ok(PureState::normalized(out, psi.spec().clone())?)
    }

    /// `ρ ↦ T ρ T†`, computed blockwise, trace renormalized.
    pub fn apply_mixed(&self, rho: &DensityOp) -> Result<DensityOp, QrfError> {
        self.check_spec(rho.spec())?;
        let dp = self.physical_dim();
        let m = rho.matrix();
        let leaked: f64 = self
            .domain_mask
            .iter()
            .enumerate()
            .filter(|(_, &inside)| !inside)
            .map(|(r, _)| linalg::trace(&m.view((r * dp, r * dp), (dp, dp)).into_owned()).re)
            .sum();
        if leaked > DOMAIN_TOL {
            return Err(QrfError::DomainViolation { leaked });
        }
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        for a in &self.branches {
            let ua = &self.physical_daggers[a.element.index()];
            for b in &self.branches {
                let ub = &self.physical_daggers[b.element.index()];
                let block = ua * m.view((a.src * dp, b.src * dp), (dp, dp)) * ub.adjoint();
                out.view_mut((a.dst * dp, b.dst * dp), (dp, dp)).copy_from(&block);
            }
        }
        let tr = linalg::trace(&out).re;
        if tr <= 0.0 {
            return Err(HilbertError::ZeroNorm.into());
        }
        out /= Complex64::new(tr, 0.0);
        Ok(DensityOp::new(out, rho.spec().clone())?)
    }

    fn check_spec(&self, spec: &FactorSpec) -> Result<(), QrfError> {
        if spec.dims() != self.spec.dims() {
            return Err(QrfError::DimensionMismatch {
                expected: self.spec.total_dim(),
                got: spec.total_dim(),
            });
        }
        Ok(())
    }

    /// Dense export in the same document style as states.
    pub fn to_document(&self) -> TransformDoc {
        TransformDoc {
            kind: self.kind,
            spec: self.spec.clone(),
            domain: self.domain,
            codomain: self.codomain,
            matrix: hilbert::matrix_to_rows(&self.matrix),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformDoc {
    #[serde(flatten)]
    pub kind: TransformKind,
    pub spec: FactorSpec,
    pub domain: Subspace,
    pub codomain: Subspace,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// Perspectival change from frame `from` to frame `to`, a unitary on the
/// whole space.
pub fn build_perspectival_transform(config: &FrameConfig, from: usize, to: usize) -> Result<QrfTransform, QrfError> {
    let a = config.frame_position(from)?;
    let b = config.frame_position(to)?;
    if a == b {
        return Err(QrfError::SameFrameIndices(from));
    }
    let group = &config.group;
    let branches = (0..config.reference_dim())
        .map(|src| {
            let tuple = config.ref_tuple(src);
            let g = tuple[b];
            let g_inv = group.inv(g);
            let mut image: Vec<GroupElement> = tuple
                .iter()
                .enumerate()
                .map(|(i, &x)| match i {
                    _ if i == a => x,
                    _ if i == b => g_inv,
                    _ => group.mul(g_inv, x),
                })
                .collect();
            image.swap(a, b);
            Branch { src, dst: config.ref_index(&image), element: g }
        })
        .collect();
    QrfTransform::assemble(
        config,
        TransformKind::Perspectival { from, to },
        Subspace::Full,
        Subspace::Full,
        branches,
    )
}

/// Passive change `T^{k→l}`, a partial isometry from `{g_k = e}` onto
/// `{g_l = e}`.
pub fn build_passive_transform(config: &FrameConfig, k: usize, l: usize) -> Result<QrfTransform, QrfError> {
    let kp = config.frame_position(k)?;
    let lp = config.frame_position(l)?;
    if kp == lp {
        return Err(QrfError::SameFrameIndices(k));
    }
    let e = config.group.identity();
    let branches = (0..config.reference_dim())
        .filter_map(|src| {
            let tuple = config.ref_tuple(src);
            if tuple[kp] != e {
                return None;
            }
            let g = tuple[lp];
            let image = config.left_act(config.group.inv(g), &tuple);
            Some(Branch { src, dst: config.ref_index(&image), element: g })
        })
        .collect();
    QrfTransform::assemble(
        config,
        TransformKind::Passive { from: k, to: l },
        Subspace::FrameAtIdentity(k),
        Subspace::FrameAtIdentity(l),
        branches,
    )
}

/// Factorization `frame_part ⊗ physical_part` with frame `frame` at the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub frame: usize,
    pub frame_part: AnyState,
    pub physical_part: AnyState,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StandardFormCheck {
    Standard(StandardForm),
    NotStandard { reason: String },
}

impl StandardFormCheck {
    pub fn is_standard(&self) -> bool {
        matches!(self, StandardFormCheck::Standard(_))
    }
}

/// Decides whether `state` is in standard form with respect to `frame`.
///
/// Pure states: all weight on `g_frame = e` and the reduced physical state
/// has purity `≥ 1 − tol`. Mixed states: trace outside `g_frame = e` at
/// most `tol` and `ρ` equals the product of its marginals within `tol`.
pub fn standard_form_check(
    config: &FrameConfig,
    state: &AnyState,
    frame: usize,
    tol: f64,
) -> Result<StandardFormCheck, QrfError> {
    let mask = config.frame_at_identity(frame)?;
    config.check_state_dim(state.dim())?;
    let dp = config.physical_dim();
    let not = |reason: String| Ok(StandardFormCheck::NotStandard { reason });
    match state {
        AnyState::Pure(psi) => {
            let amps = psi.amplitudes();
            let off: f64 = mask
                .iter()
                .enumerate()
                .filter(|(_, &m)| !m)
                .map(|(r, _)| amps.rows(r * dp, dp).norm_squared())
                .sum();
            if off > tol {
                return not(format!("weight {off:e} with frame {frame} away from the identity"));
            }
            let m = CMatrix::from_fn(config.reference_dim(), dp, |r, p| amps[r * dp + p]);
            let svd = m.clone().svd(true, true);
            let purity: f64 = svd.singular_values.iter().map(|s| s.powi(4)).sum();
            if 1.0 - purity > tol {
                return not(format!(
                    "reference and physical sectors are entangled (physical purity {purity:.12})"
                ));
            }
            let top = svd
                .singular_values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .expect("nonempty");
            let v_t = svd.v_t.expect("requested");
            let phys = linalg::fix_global_phase(&v_t.row(top).transpose());
            let frame_amps = &m * phys.map(|z| z.conj());
            let frame_part = PureState::normalized(frame_amps, config.reference_spec())?;
            let physical_part = PureState::normalized(phys, config.physical_spec())?;
            Ok(StandardFormCheck::Standard(StandardForm {
                frame,
                frame_part: AnyState::Pure(frame_part),
                physical_part: AnyState::Pure(physical_part),
            }))
        }
        AnyState::Mixed(rho) => {
            let m = rho.matrix();
            let off: f64 = mask
                .iter()
                .enumerate()
                .filter(|(_, &inside)| !inside)
                .map(|(r, _)| (0..dp).map(|p| m[(r * dp + p, r * dp + p)].re).sum::<f64>())
                .sum();
            if off > tol {
                return not(format!("trace {off:e} with frame {frame} away from the identity"));
            }
            let spec = rho.spec();
            let rho_ref = hilbert::partial_trace(rho, &spec.reference_positions())?;
            let rho_phys = hilbert::partial_trace(rho, &spec.physical_positions())?;
            let product = rho_ref.matrix().kronecker(rho_phys.matrix());
            let residual = linalg::max_abs_diff(&product, m);
            if residual > tol {
                return not(format!("state is not a product of its marginals (residual {residual:e})"));
            }
            Ok(StandardFormCheck::Standard(StandardForm {
                frame,
                frame_part: AnyState::Mixed(rho_ref),
                physical_part: AnyState::Mixed(rho_phys),
            }))
        }
    }
}

/// One branch `p · 𝒰†(g) ρ 𝒰(g)` of a random local unitary channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTerm {
    pub element: GroupElement,
    pub weight: f64,
    pub unitary: CMatrix,
}

/// Convex mixture of product unitaries acting on the physical sector.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomUnitaryChannel {
    pub terms: Vec<ChannelTerm>,
    physical_spec: FactorSpec,
}

impl RandomUnitaryChannel {
    pub fn apply(&self, rho: &DensityOp) -> Result<DensityOp, QrfError> {
        if rho.spec().dims() != self.physical_spec.dims() {
            return Err(QrfError::DimensionMismatch {
                expected: self.physical_spec.total_dim(),
                got: rho.dim(),
            });
        }
        let mut out = CMatrix::zeros(rho.dim(), rho.dim());
        for t in &self.terms {
            out += (&t.unitary * rho.matrix() * t.unitary.adjoint()) * Complex64::new(t.weight, 0.0);
        }
        Ok(DensityOp::new(out, rho.spec().clone())?)
    }

    pub fn apply_pure(&self, psi: &PureState) -> Result<DensityOp, QrfError> {
        self.apply(&psi.to_density())
    }

    pub fn is_unitary(&self) -> bool {
        self.terms.len() == 1
    }
}

/// Physical-sector channel induced by `T^{k→l}` on standard-form states
/// with the given frame part.
///
/// Branch `g⃗` (with `g_k = e`) acts on the physical sector with
/// `𝒰†(g_l)`, so weights `|f(g⃗)|²` are summed per value of `g_l`. In the
/// target frame's labels this is `𝒰†(h_k⁻¹)` with `h_k = g_l⁻¹`.
pub fn induced_channel(
    config: &FrameConfig,
    k: usize,
    l: usize,
    frame_part: &PureState,
) -> Result<RandomUnitaryChannel, QrfError> {
    let kp = config.frame_position(k)?;
    let lp = config.frame_position(l)?;
    if frame_part.spec().dims() != config.reference_spec().dims() {
        return Err(QrfError::NotAFramePart(format!(
            "dimension {} does not match the reference sector {}",
            frame_part.dim(),
            config.reference_dim()
        )));
    }
    let e = config.group.identity();
    let amps = frame_part.amplitudes();
    let off: f64 = (0..config.reference_dim())
        .filter(|&r| config.ref_tuple(r)[kp] != e)
        .map(|r| amps[r].norm_sqr())
        .sum();
    if off > DOMAIN_TOL {
        return Err(QrfError::NotAFramePart(format!(
            "weight {off:e} with frame {k} away from the identity"
        )));
    }
    let mut weights = vec![0.0; config.group.order()];
    if kp == lp {
        weights[e.index()] = 1.0;
    } else {
        for r in 0..config.reference_dim() {
            let tuple = config.ref_tuple(r);
            if tuple[kp] == e {
                weights[tuple[lp].index()] += amps[r].norm_sqr();
            }
        }
    }
    let terms = config
        .group
        .elements()
        .filter(|g| weights[g.index()] > hilbert::NULL_WEIGHT)
        .map(|g| ChannelTerm {
            element: g,
            weight: weights[g.index()],
            unitary: config.physical_dagger(g).clone(),
        })
        .collect();
    Ok(RandomUnitaryChannel { terms, physical_spec: config.physical_spec() })
}

/// Builds `Σ_{g⃗} f(g⃗) |g⃗⟩ ⊗ ψ(g⃗)` from per-tuple weights and physical
/// states and normalizes the result.
pub fn assemble_state(
    config: &FrameConfig,
    terms: &[(Vec<GroupElement>, Complex64, CVector)],
) -> Result<PureState, QrfError> {
    let dp = config.physical_dim();
    let mut amps = CVector::zeros(config.total_dim());
    for (tuple, weight, psi) in terms {
        if psi.len() != dp {
            return Err(QrfError::DimensionMismatch { expected: dp, got: psi.len() });
        }
        let r = config.ref_index(tuple);
        let mut block = amps.rows_mut(r * dp, dp);
        block += psi * *weight;
    }
    Ok(PureState::normalized(amps, config.spec().clone())?)
}

/// `frame_part ⊗ physical_part` under the configuration's spec.
pub fn standard_form_state(
    config: &FrameConfig,
    frame_part: &CVector,
    physical_part: &CVector,
) -> Result<PureState, QrfError> {
    let amps = frame_part.kronecker(physical_part);
    config.check_state_dim(amps.len())?;
    Ok(PureState::normalized(amps, config.spec().clone())?)
}

/// Whether a pure state has all of its weight on `g_frame = e`, within
/// `tol` in norm.
pub fn in_frame_domain(config: &FrameConfig, psi: &PureState, frame: usize, tol: f64) -> Result<bool, QrfError> {
    let t = QrfTransform::trivial(config, frame)?;
    Ok(t.leaked_norm(psi.amplitudes()) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_state, ConditionalDecomposition};
    use crate::linalg::{c, sigma_x, I};

    fn z2_config() -> FrameConfig {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let r = Representation::regular(&z2);
        FrameConfig::new(z2, 2, vec![r.clone(), r]).unwrap()
    }

    fn vec16(entries: &[(usize, Complex64)]) -> CVector {
        let mut v = CVector::zeros(16);
        for &(i, z) in entries {
            v[i] = z;
        }
        v
    }

    fn product_example(cfg: &FrameConfig) -> PureState {
        let s = 0.5f64.sqrt();
        PureState::new(vec16(&[(0b0000, c(s, 0.0)), (0b0100, c(s, 0.0))]), cfg.spec().clone()).unwrap()
    }

    fn bell_conditionals(cfg: &FrameConfig) -> PureState {
        // (|0⟩|0⟩Φ_{+i} + i|0⟩|1⟩Φ_{-i})/√2
        PureState::new(
            vec16(&[
                (0b0000, c(0.5, 0.0)),
                (0b0011, I * 0.5),
                (0b0100, I * 0.5),
                (0b0111, c(0.5, 0.0)),
            ]),
            cfg.spec().clone(),
        )
        .unwrap()
    }

    /// The Z2 frame change 1→2 built by hand: Π₁₂ · 1 ⊗ (|0⟩⟨0| ⊗ 1 + |1⟩⟨1| ⊗ σx ⊗ σx).
    fn cnot_form() -> CMatrix {
        let p0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let p1 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        let controlled = p0.kronecker(&linalg::identity(4)) + p1.kronecker(&sigma_x().kronecker(&sigma_x()));
        let swap = linalg::factor_permutation(&[2, 2, 2, 2], &[1, 0, 2, 3]);
        swap * linalg::identity(2).kronecker(&controlled)
    }

    #[test]
    fn perspectival_z2_is_cnot_form() {
        let t = build_perspectival_transform(&z2_config(), 1, 2).unwrap();
        assert!(linalg::max_abs_diff(t.matrix(), &cnot_form()) < 1e-15);
        assert!(linalg::unitarity_residual(t.matrix()) < 1e-12);
    }

    #[test]
    fn perspectival_maps_product_to_ghz() {
        let cfg = z2_config();
        let t = build_perspectival_transform(&cfg, 1, 2).unwrap();
        let out = t.apply(&product_example(&cfg)).unwrap();
        let s = 0.5f64.sqrt();
        let expected = vec16(&[(0b0000, c(s, 0.0)), (0b1011, c(s, 0.0))]);
        assert!(linalg::max_abs_diff_vec(out.amplitudes(), &expected) < 1e-15);
    }

    #[test]
    fn perspectival_identity_control_is_trivial() {
        let cfg = z2_config();
        let t = build_perspectival_transform(&cfg, 1, 2).unwrap();
        for ab in 0..4 {
            let psi = basis_state(cfg.spec(), &[0, 0, ab / 2, ab % 2]).unwrap();
            let out = t.apply(&psi).unwrap();
            assert!(out.distance_up_to_phase(&psi) < 1e-15);
        }
    }

    #[test]
    fn passive_maps_entangled_conditionals_to_standard_form() {
        let cfg = z2_config();
        let t = build_passive_transform(&cfg, 1, 2).unwrap();
        let out = t.apply(&bell_conditionals(&cfg)).unwrap();
        // |+⟩_1 |0⟩_2 Φ_{+i} in positional order
        let expected = vec16(&[
            (0b0000, c(0.5, 0.0)),
            (0b0011, I * 0.5),
            (0b1000, c(0.5, 0.0)),
            (0b1011, I * 0.5),
        ]);
        assert!(linalg::max_abs_diff_vec(out.amplitudes(), &expected) < 1e-15);
    }

    #[test]
    fn passive_round_trip_is_identity_on_domain() {
        let cfg = z2_config();
        let fwd = build_passive_transform(&cfg, 1, 2).unwrap();
        let back = build_passive_transform(&cfg, 2, 1).unwrap();
        let prod = back.matrix() * fwd.matrix();
        assert!(linalg::max_abs_diff(&prod, &cfg.frame_projector(1).unwrap()) < 1e-15);
    }

    #[test]
    fn passive_errors() {
        let cfg = z2_config();
        assert_eq!(build_passive_transform(&cfg, 1, 1).unwrap_err(), QrfError::SameFrameIndices(1));
        assert!(matches!(
            build_passive_transform(&cfg, 1, 3),
            Err(QrfError::InvalidFrame { frame: 3, frames: 2 })
        ));
        let t = build_passive_transform(&cfg, 1, 2).unwrap();
        let outside = basis_state(cfg.spec(), &[1, 0, 0, 0]).unwrap();
        assert!(matches!(t.apply(&outside), Err(QrfError::DomainViolation { leaked }) if (leaked - 1.0).abs() < 1e-15));
    }

    #[test]
    fn perspectival_and_passive_agree_on_domain() {
        for (name, frames) in [("Z2", 3), ("Z3", 3), ("S3", 2)] {
            let g = GroupSpec::named(name).resolve().unwrap();
            let cfg = FrameConfig::new(g.clone(), frames, vec![Representation::regular(&g)]).unwrap();
            let pairs: &[(usize, usize)] = if frames == 3 { &[(1, 2), (2, 3), (3, 1)] } else { &[(1, 2), (2, 1)] };
            for &(k, l) in pairs {
                let s = build_perspectival_transform(&cfg, k, l).unwrap();
                let t = build_passive_transform(&cfg, k, l).unwrap();
                let restricted = s.matrix() * cfg.frame_projector(k).unwrap();
                assert!(linalg::max_abs_diff(&restricted, t.matrix()) < 1e-15, "{name} {k}->{l}");
                let (dom, cod) = t.isometry_residuals();
                assert!(dom < 1e-12 && cod < 1e-12);
                assert!(linalg::unitarity_residual(s.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn conditional_covariance_holds_for_bell_conditionals() {
        let cfg = z2_config();
        let psi = bell_conditionals(&cfg);
        let t = build_passive_transform(&cfg, 1, 2).unwrap();
        let out = t.apply(&psi).unwrap();
        let before = ConditionalDecomposition::of(&psi).unwrap();
        let after = ConditionalDecomposition::of(&out).unwrap();
        let g = cfg.group();
        for entry in after.entries.iter().filter(|e| e.tuple[1] == 0) {
            let h: Vec<GroupElement> = entry.tuple.iter().map(|&x| GroupElement(x)).collect();
            let hk_inv = g.inv(h[0]);
            let src = cfg.left_act(hk_inv, &h);
            let src_entry = &before.entries[cfg.ref_index(&src)];
            // f̃(h) = f(h_k⁻¹ h)
            assert!((entry.weight.norm() - src_entry.weight.norm()).abs() < 1e-15);
            if let (Some(new), Some(old)) = (&entry.state, &src_entry.state) {
                let expected = cfg.physical_dagger(hk_inv) * old.amplitudes();
                assert!((1.0 - new.amplitudes().dotc(&expected).norm()) < 1e-12);
            }
        }
    }

    #[test]
    fn mixed_application_matches_pure_application() {
        let cfg = z2_config();
        let t = build_passive_transform(&cfg, 1, 2).unwrap();
        let rho = t.apply_mixed(&bell_conditionals(&cfg).to_density()).unwrap();
        let expected = t.apply(&bell_conditionals(&cfg)).unwrap().to_density();
        assert!(linalg::max_abs_diff(rho.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn maximally_mixed_domain_maps_to_maximally_mixed_codomain() {
        let cfg = z2_config();
        let t = build_passive_transform(&cfg, 1, 2).unwrap();
        let p = cfg.frame_projector(1).unwrap();
        let n = linalg::trace(&p).re;
        let rho = DensityOp::new(p / c(n, 0.0), cfg.spec().clone()).unwrap();
        let out = t.apply_mixed(&rho).unwrap();
        let q = cfg.frame_projector(2).unwrap() / c(n, 0.0);
        assert!(linalg::max_abs_diff(out.matrix(), &q) < 1e-15);
    }

    #[test]
    fn standard_form_detection() {
        let cfg = z2_config();
        let t = build_passive_transform(&cfg, 1, 2).unwrap();
        let standard_image = t.apply(&bell_conditionals(&cfg)).unwrap();
        match standard_form_check(&cfg, &AnyState::Pure(standard_image.clone()), 2, 1e-9).unwrap() {
            StandardFormCheck::Standard(sf) => {
                let AnyState::Pure(frame) = &sf.frame_part else { panic!() };
                let AnyState::Pure(phys) = &sf.physical_part else { panic!() };
                let s = 0.5f64.sqrt();
                // |+⟩_1 |0⟩_2
                let plus0 = CVector::from_column_slice(&[c(s, 0.0), ZERO, c(s, 0.0), ZERO]);
                assert!((1.0 - frame.amplitudes().dotc(&plus0).norm()) < 1e-12);
                let phi = CVector::from_column_slice(&[c(s, 0.0), ZERO, ZERO, I * s]);
                assert!((1.0 - phys.amplitudes().dotc(&phi).norm()) < 1e-12);
                let rebuilt = hilbert::tensor(&[frame.clone(), phys.clone()]).unwrap();
                assert!((1.0 - rebuilt.overlap(&standard_image)) < 1e-12);
            }
            other => panic!("expected standard form, got {other:?}"),
        }
        // GHZ image: frame 1 entangled with AB
        let ghz_image = build_perspectival_transform(&cfg, 1, 2).unwrap().apply(&product_example(&cfg)).unwrap();
        assert!(!standard_form_check(&cfg, &AnyState::Pure(ghz_image.clone()), 2, 1e-9).unwrap().is_standard());
        // wrong axis: the image has frame 1 in |+⟩
        assert!(!standard_form_check(&cfg, &AnyState::Pure(standard_image), 1, 1e-9).unwrap().is_standard());
        // |e⟩|e⟩|product⟩
        let prod = basis_state(cfg.spec(), &[0, 0, 1, 0]).unwrap();
        assert!(standard_form_check(&cfg, &AnyState::Pure(prod.clone()), 1, 1e-9).unwrap().is_standard());
        assert!(standard_form_check(&cfg, &AnyState::Mixed(prod.to_density()), 1, 1e-9).unwrap().is_standard());
        assert!(!standard_form_check(&cfg, &AnyState::Mixed(ghz_image.to_density()), 2, 1e-9).unwrap().is_standard());
    }

    #[test]
    fn induced_channel_example2_backwards() {
        let cfg = z2_config();
        let s = 0.5f64.sqrt();
        let frame = PureState::new(
            CVector::from_column_slice(&[c(s, 0.0), ZERO, c(s, 0.0), ZERO]),
            cfg.reference_spec(),
        )
        .unwrap();
        let phi = PureState::new(
            CVector::from_column_slice(&[c(s, 0.0), ZERO, ZERO, I * s]),
            cfg.physical_spec(),
        )
        .unwrap();
        let ch = induced_channel(&cfg, 2, 1, &frame).unwrap();
        assert_eq!(ch.terms.len(), 2);
        let out = ch.apply_pure(&phi).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5, 0.0);
        expected[(3, 3)] = c(0.5, 0.0);
        assert!(linalg::max_abs_diff(out.matrix(), &expected) < 1e-15);

        // agrees with tracing out frames after the transform
        let global = standard_form_state(&cfg, frame.amplitudes(), phi.amplitudes()).unwrap();
        let moved = build_passive_transform(&cfg, 2, 1).unwrap().apply(&global).unwrap();
        let traced = moved.physical_density().unwrap();
        assert!(linalg::max_abs_diff(traced.matrix(), out.matrix()) < 1e-12);
    }

    #[test]
    fn induced_channel_special_cases() {
        let cfg = z2_config();
        let frame = basis_state(&cfg.reference_spec(), &[0, 1]).unwrap();
        let ch = induced_channel(&cfg, 1, 2, &frame).unwrap();
        assert!(ch.is_unitary());
        assert_eq!(ch.terms[0].unitary, sigma_x().kronecker(&sigma_x()));
        let id = induced_channel(&cfg, 1, 1, &frame).unwrap();
        assert!(id.is_unitary());
        assert_eq!(id.terms[0].unitary, linalg::identity(4));
        let bad = basis_state(&cfg.reference_spec(), &[1, 0]).unwrap();
        assert!(matches!(induced_channel(&cfg, 1, 2, &bad), Err(QrfError::NotAFramePart(_))));
    }

    #[test]
    fn transform_document_exports_matrix() {
        let cfg = z2_config();
        let t = build_passive_transform(&cfg, 1, 2).unwrap();
        let doc = t.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.starts_with(r#"{"kind":"passive","from":1,"to":2"#), "{json}");
        let back: TransformDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(hilbert::matrix_from_rows(&back.matrix).unwrap(), *t.matrix());
    }
}
