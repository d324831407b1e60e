//! Seeded randomized suites for the frame-change results.
//!
//! Each suite samples one input state per trial from a dedicated random
//! stream `(seed, trial)`, applies the passive transforms and evaluates a
//! predicate on the result. Trials run on the rayon pool; outcomes are merged
//! in trial order, so the report is a pure function of the [`SuiteSpec`].
//!
//! The predicate evaluation only looks at the recorded [`TrialInput`], which
//! is what makes every failure reproducible from its serialized form.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entanglement::{self, Bipartition};
use crate::group::{GroupElement, GroupSpec};
use crate::hilbert::{AnyState, ConditionalDecomposition, DensityOp, PureState};
use crate::linalg::{self, CMatrix, CVector};
use crate::qrf::{self, FrameConfig, QrfError, QrfTransform, StandardFormCheck};
use crate::random;
use crate::repr::RepSpec;

pub const VERIFY_SCHEMA: &str = "qrflab.verify/1";
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const ORACLE_TOLERANCE: f64 = 1e-12;
/// Smallest physical negativity for a corollary trial to count as entangled.
pub const COROLLARY_FILTER: f64 = 0.05;
/// Every fifth monotonicity trial uses a single-tuple frame part.
const SINGLE_SUPPORT_PERIOD: usize = 5;
/// Every fourth mixed trial uses a product of mixed frame and physical parts.
const MIXED_STANDARD_PERIOD: usize = 4;
const SEPARABLE_BLOCK_TERMS: usize = 3;
const COROLLARY_BATCH: usize = 256;
const COROLLARY_ATTEMPTS_PER_TRIAL: usize = 1000;

const BUG_NOTE: &str = "implementation bug or numerical tolerance issue";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid suite configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Qrf(#[from] QrfError),
    #[error(transparent)]
    Entanglement(#[from] entanglement::EntanglementError),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Theorem,
    Corollary,
    NoCreation,
    Monotonicity,
    Mixed,
    Oracle,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 6] = [
        SuiteKind::Theorem,
        SuiteKind::Corollary,
        SuiteKind::NoCreation,
        SuiteKind::Monotonicity,
        SuiteKind::Mixed,
        SuiteKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Theorem => "theorem",
            SuiteKind::Corollary => "corollary",
            SuiteKind::NoCreation => "no_creation",
            SuiteKind::Monotonicity => "monotonicity",
            SuiteKind::Mixed => "mixed",
            SuiteKind::Oracle => "oracle",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        let norm = name.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == norm)
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub suite: SuiteKind,
    pub group: GroupSpec,
    pub frames: usize,
    pub physical: Vec<RepSpec>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl SuiteSpec {
    /// Default configuration of each suite.
    pub fn builtin(kind: SuiteKind) -> Self {
        let (trials, seed) = match kind {
            SuiteKind::Theorem => (500, 7),
            SuiteKind::Corollary => (200, 11),
            SuiteKind::NoCreation => (500, 3),
            SuiteKind::Monotonicity => (500, 5),
            SuiteKind::Mixed => (300, 13),
            SuiteKind::Oracle => (100, 17),
        };
        let group = if kind == SuiteKind::Oracle { "Z3" } else { "Z2" };
        let mut spec = Self {
            suite: kind,
            group: GroupSpec::named(group),
            frames: 2,
            physical: Vec::new(),
            trials,
            seed,
            tolerance: if kind == SuiteKind::Oracle { ORACLE_TOLERANCE } else { DEFAULT_TOLERANCE },
        };
        spec.physical = default_physical(kind, &spec.group);
        spec
    }

    pub fn builtin_named(name: &str) -> Result<Self, VerifyError> {
        SuiteKind::parse(name).map(Self::builtin).ok_or_else(|| VerifyError::UnknownSuite(name.into()))
    }

    /// Replaces the group and resets the physical systems to that group's
    /// defaults.
    pub fn with_group(mut self, group: GroupSpec) -> Self {
        self.physical = default_physical(self.suite, &group);
        self.group = group;
        self
    }

    pub fn config(&self) -> Result<FrameConfig, VerifyError> {
        if self.frames < 2 {
            return Err(VerifyError::Config(format!("{} needs at least two frames", self.suite)));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(VerifyError::Config(format!("tolerance {} must be nonnegative", self.tolerance)));
        }
        let config = qrf::ConfigSpec {
            group: self.group.clone(),
            frames: self.frames,
            physical: self.physical.clone(),
        }
        .resolve()?;
        if config.physical_reps().is_empty() {
            return Err(VerifyError::Config("at least one physical system is required".into()));
        }
        if self.suite == SuiteKind::Mixed {
            let mut dims = config.physical_dims();
            dims.sort_unstable();
            if dims != [2, 2] && dims != [2, 3] {
                return Err(VerifyError::Config(format!(
                    "mixed suite needs a 2x2 or 2x3 physical sector, got {dims:?}"
                )));
            }
        }
        Ok(config)
    }
}

/// Physical systems used when a suite names only a group: two qubits for
/// the cyclic groups and `Z2xZ2`, the regular representation otherwise.
/// The oracle suite uses a single regular system.
pub fn default_physical(kind: SuiteKind, group: &GroupSpec) -> Vec<RepSpec> {
    if kind == SuiteKind::Oracle {
        return vec![RepSpec::Regular];
    }
    let name = match group {
        GroupSpec::Named(n) => n.trim().to_ascii_uppercase(),
        GroupSpec::Table(_) => String::new(),
    };
    if name == "Z2XZ2" {
        let x = linalg::sigma_x();
        let z = linalg::sigma_z();
        let id = linalg::identity(2);
        let pick = |m: &CMatrix, on: bool| if on { m.clone() } else { id.clone() };
        // Labels (a, b) ↦ 2a + b.
        let a: Vec<CMatrix> = (0..4).map(|g| pick(&x, g / 2 == 1)).collect();
        let b: Vec<CMatrix> = (0..4).map(|g| pick(&z, g % 2 == 1)).collect();
        return vec![RepSpec::inline(&a), RepSpec::inline(&b)];
    }
    if let Some(n) = name.strip_prefix('Z').and_then(|s| s.parse::<usize>().ok()) {
        if n >= 3 {
            let mats: Vec<CMatrix> = (0..n)
                .map(|g| {
                    let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * g as f64 / n as f64);
                    CMatrix::from_diagonal(&CVector::from_vec(vec![linalg::ONE, phase]))
                })
                .collect();
            return vec![RepSpec::inline(&mats), RepSpec::inline(&mats)];
        }
    }
    vec![RepSpec::Regular, RepSpec::Regular]
}

/// How a trial input was sampled; selects the predicate that checks it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialFamily {
    /// Random weights on `{g_k = e}` with product conditional states.
    ProductConditionals,
    /// Random domain state whose physical sector is entangled.
    EntangledPhysical,
    /// Standard form with a product physical part.
    SeparableStandard,
    /// Standard form with a generic physical part.
    GenericStandard,
    /// Mixture of product-conditional states.
    SeparableBlocks,
    /// `ρ_ref ⊗ ρ_phys` with a generic mixed physical part.
    MixedStandard,
    /// Random domain state compared against the dense operator.
    OracleDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialInput {
    pub family: TrialFamily,
    pub from: usize,
    pub state: AnyState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Target frame of the description that failed.
    pub to: usize,
    pub predicate: String,
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub seed_offset: u64,
    pub predicate: String,
    pub measured: f64,
    pub to: usize,
    pub input: TrialInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: SuiteKind,
    pub spec: SuiteSpec,
    /// Trials whose predicate was evaluated.
    pub trials_run: usize,
    /// Sampled inputs, including rejected corollary candidates.
    pub attempted: usize,
    pub passed: bool,
    pub verdict: String,
    /// Extremes over all trials. `max_*` keys hold maxima and `min_*` keys
    /// minima.
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub wall_time: WallTime,
}

/// Elapsed time of a run. Not serialized and ignored by equality, so
/// reports stay a function of their spec.
#[derive(Debug, Clone, Copy, Default)]
pub struct WallTime(pub Duration);

impl PartialEq for WallTime {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite      {}", self.suite)?;
        writeln!(f, "group      {}  frames {}  physical {}", self.spec.group, self.spec.frames, self.spec.physical.len())?;
        writeln!(f, "seed       {}  tolerance {:e}", self.spec.seed, self.spec.tolerance)?;
        writeln!(f, "trials     {} run / {} sampled", self.trials_run, self.attempted)?;
        for (k, v) in &self.metrics {
            writeln!(f, "  {k:<32} {v:.3e}")?;
        }
        for fail in self.failures.iter().take(10) {
            writeln!(
                f,
                "  FAIL trial {} frame {}→{}: {} (measured {:.3e})",
                fail.seed_offset, fail.input.from, fail.to, fail.predicate, fail.measured
            )?;
        }
        if self.failures.len() > 10 {
            writeln!(f, "  ... {} more failures", self.failures.len() - 10)?;
        }
        write!(f, "{}  ({:.2?})", self.verdict, self.wall_time.0)
    }
}

#[derive(Debug, Default)]
struct Outcome {
    violations: Vec<Violation>,
    metrics: Vec<(&'static str, f64)>,
}

impl Outcome {
    fn metric(&mut self, name: &'static str, value: f64) {
        self.metrics.push((name, value));
    }

    fn require(&mut self, ok: bool, to: usize, predicate: impl Into<String>, measured: f64) {
        if !ok {
            self.violations.push(Violation { to, predicate: predicate.into(), measured });
        }
    }
}

/// Configuration plus every transform a suite may need.
pub struct SuiteContext {
    spec: SuiteSpec,
    config: FrameConfig,
    /// `transforms[k-1][l-1]`; the diagonal holds the trivial projectors.
    transforms: Vec<Vec<QrfTransform>>,
    /// Dense oracle operators, same indexing; empty unless the suite is the
    /// oracle suite.
    dense: Vec<Vec<CMatrix>>,
    cuts: Vec<Bipartition>,
    two_qubits: bool,
}

impl SuiteContext {
    pub fn new(spec: &SuiteSpec) -> Result<Self, VerifyError> {
        let config = spec.config()?;
        let m = config.frames();
        let mut transforms = Vec::with_capacity(m);
        for k in 1..=m {
            let mut row = Vec::with_capacity(m);
            for l in 1..=m {
                row.push(if k == l {
                    QrfTransform::trivial(&config, k)?
                } else {
                    qrf::build_passive_transform(&config, k, l)?
                });
            }
            transforms.push(row);
        }
        let dense = if spec.suite == SuiteKind::Oracle {
            (1..=m)
                .map(|k| (1..=m).map(|l| dense_oracle_operator(&config, k, l)).collect())
                .collect()
        } else {
            Vec::new()
        };
        let cuts = Bipartition::all(config.physical_reps().len());
        let two_qubits = config.physical_dims() == [2, 2];
        Ok(Self { spec: spec.clone(), config, transforms, dense, cuts, two_qubits })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    fn transform(&self, k: usize, l: usize) -> &QrfTransform {
        &self.transforms[k - 1][l - 1]
    }

    fn domain_rows(&self, k: usize) -> Vec<usize> {
        let mask = self.config.frame_at_identity(k).expect("frame in range");
        mask.iter().enumerate().filter(|(_, &m)| m).map(|(r, _)| r).collect()
    }

    fn other_frames(&self, k: usize) -> impl Iterator<Item = usize> {
        (1..=self.config.frames()).filter(move |&l| l != k)
    }

    fn sample(&self, trial: usize) -> Result<Option<TrialInput>, VerifyError> {
        let mut rng = random::trial_rng(self.spec.seed, trial as u64);
        let k = 1 + trial % self.config.frames();
        let rows = self.domain_rows(k);
        let dims = self.config.physical_dims();
        let dp = self.config.physical_dim();
        let dr = self.config.reference_dim();
        let product_conditionals = |rng: &mut random::TrialRng| {
            let entries: Vec<(Vec<GroupElement>, Complex64, CVector)> = rows
                .iter()
                .map(|&r| {
                    let w = random::gaussian_vector(rng, 1)[0];
                    (self.config.ref_tuple(r), w, random::random_product(rng, &dims))
                })
                .collect();
            qrf::assemble_state(&self.config, &entries)
        };
        let frame_amps = |rng: &mut random::TrialRng| {
            let mut v = CVector::zeros(dr);
            for &r in &rows {
                v[r] = random::gaussian_vector(rng, 1)[0];
            }
            v
        };
        let (family, state) = match self.spec.suite {
            SuiteKind::Theorem => (TrialFamily::ProductConditionals, AnyState::Pure(product_conditionals(&mut rng)?)),
            SuiteKind::Corollary => {
                let psi = self.random_domain_state(&mut rng, &rows)?;
                let rho = psi.physical_density().map_err(QrfError::from)?;
                if entanglement::max_negativity(&rho) <= COROLLARY_FILTER {
                    return Ok(None);
                }
                (TrialFamily::EntangledPhysical, AnyState::Pure(psi))
            }
            SuiteKind::NoCreation => {
                let f = frame_amps(&mut rng);
                let phys = random::random_product(&mut rng, &dims);
                (TrialFamily::SeparableStandard, AnyState::Pure(qrf::standard_form_state(&self.config, &f, &phys)?))
            }
            SuiteKind::Monotonicity => {
                let f = if trial % SINGLE_SUPPORT_PERIOD == SINGLE_SUPPORT_PERIOD - 1 {
                    let mut v = CVector::zeros(dr);
                    let r = rows[rng.random_range(0..rows.len())];
                    v[r] = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
                    v
                } else {
                    frame_amps(&mut rng)
                };
                let phys = random::random_pure(&mut rng, dp);
                (TrialFamily::GenericStandard, AnyState::Pure(qrf::standard_form_state(&self.config, &f, &phys)?))
            }
            SuiteKind::Mixed => {
                if trial % MIXED_STANDARD_PERIOD == MIXED_STANDARD_PERIOD - 1 {
                    let rank = 1 + rng.random_range(0..rows.len());
                    let sub = random::random_density(&mut rng, rows.len(), rank);
                    let mut rho_ref = CMatrix::zeros(dr, dr);
                    for (i, &ri) in rows.iter().enumerate() {
                        for (j, &rj) in rows.iter().enumerate() {
                            rho_ref[(ri, rj)] = sub[(i, j)];
                        }
                    }
                    let rank = 1 + rng.random_range(0..2);
                    let rho_phys = random::random_density(&mut rng, dp, rank);
                    let rho = DensityOp::new(rho_ref.kronecker(&rho_phys), self.config.spec().clone())
                        .map_err(QrfError::from)?;
                    (TrialFamily::MixedStandard, AnyState::Mixed(rho))
                } else {
                    let weights = random::random_weights(&mut rng, SEPARABLE_BLOCK_TERMS);
                    let mut parts = Vec::with_capacity(weights.len());
                    for w in weights {
                        parts.push((w, product_conditionals(&mut rng)?.to_density()));
                    }
                    let rho = DensityOp::mixture(&parts).map_err(QrfError::from)?;
                    (TrialFamily::SeparableBlocks, AnyState::Mixed(rho))
                }
            }
            SuiteKind::Oracle => (TrialFamily::OracleDomain, AnyState::Pure(self.random_domain_state(&mut rng, &rows)?)),
        };
        Ok(Some(TrialInput { family, from: k, state }))
    }

    fn random_domain_state(&self, rng: &mut random::TrialRng, rows: &[usize]) -> Result<PureState, QrfError> {
        let dp = self.config.physical_dim();
        let mut amps = CVector::zeros(self.config.total_dim());
        for &r in rows {
            let block = random::gaussian_vector(rng, dp);
            amps.rows_mut(r * dp, dp).copy_from(&block);
        }
        Ok(PureState::normalized(amps, self.config.spec().clone())?)
    }

    /// Evaluates the predicate for `input`.
    pub fn check(&self, input: &TrialInput) -> Result<Vec<Violation>, VerifyError> {
        Ok(self.evaluate(input)?.violations)
    }

    fn evaluate(&self, input: &TrialInput) -> Result<Outcome, VerifyError> {
        let k = input.from;
        self.config.frame_position(k)?;
        let tol = self.spec.tolerance;
        let mut out = Outcome::default();
        match (input.family, &input.state) {
            (TrialFamily::ProductConditionals, AnyState::Pure(psi)) => {
                for l in self.other_frames(k) {
                    let after = self.transform(k, l).apply(psi)?;
                    let impurity = self.max_conditional_impurity(&after)?;
                    out.metric("max_conditional_impurity", impurity);
                    out.require(impurity <= tol, l, "every conditional state is fully separable", impurity);
                    let rho = after.physical_density().map_err(QrfError::from)?;
                    let neg = self.max_cut_negativity(&rho)?;
                    out.metric("max_physical_negativity", neg);
                    out.require(neg <= tol, l, "physical state is PPT across every cut", neg);
                }
            }
            (TrialFamily::EntangledPhysical, AnyState::Pure(psi)) => {
                let rho = psi.physical_density().map_err(QrfError::from)?;
                let neg = self.max_cut_negativity(&rho)?;
                out.metric("min_filter_negativity", neg);
                out.require(neg > COROLLARY_FILTER, k, "input passes the negativity filter", neg);
                for l in 1..=self.config.frames() {
                    let desc = if l == k { psi.clone() } else { self.transform(k, l).apply(psi)? };
                    let impurity = self.max_conditional_impurity(&desc)?;
                    out.metric("min_max_conditional_impurity", impurity);
                    out.require(impurity > tol, l, "some conditional state is entangled", impurity);
                }
            }
            (TrialFamily::SeparableStandard, AnyState::Pure(psi)) => {
                for l in self.other_frames(k) {
                    let rho = self.transform(k, l).apply(psi)?.physical_density().map_err(QrfError::from)?;
                    let neg = self.max_cut_negativity(&rho)?;
                    out.metric("max_physical_negativity", neg);
                    out.require(neg <= tol, l, "physical negativity vanishes across every cut", neg);
                    if self.two_qubits {
                        let c = entanglement::concurrence(&rho)?;
                        out.metric("max_physical_concurrence", c);
                        out.require(c <= tol, l, "physical concurrence vanishes", c);
                    }
                }
            }
            (TrialFamily::GenericStandard, AnyState::Pure(psi)) => {
                let form = match qrf::standard_form_check(&self.config, &input.state, k, tol)? {
                    StandardFormCheck::Standard(form) => form,
                    StandardFormCheck::NotStandard { reason } => {
                        out.require(false, k, format!("input is in standard form ({reason})"), 1.0);
                        return Ok(out);
                    }
                };
                let (AnyState::Pure(frame_part), AnyState::Pure(phys)) = (&form.frame_part, &form.physical_part) else {
                    unreachable!("pure input gives pure parts")
                };
                let before = phys.to_density();
                for l in self.other_frames(k) {
                    let rho = self.transform(k, l).apply(psi)?.physical_density().map_err(QrfError::from)?;
                    let channel = qrf::induced_channel(&self.config, k, l, frame_part)?;
                    let residual = linalg::max_abs_diff(channel.apply(&before)?.matrix(), rho.matrix());
                    out.metric("max_channel_residual", residual);
                    out.require(residual <= tol, l, "induced channel reproduces the physical state", residual);
                    let unitary = channel.is_unitary();
                    let mut gaps = Vec::new();
                    for cut in &self.cuts {
                        gaps.push(entanglement::negativity(&rho, cut)? - entanglement::negativity(&before, cut)?);
                    }
                    if self.two_qubits {
                        gaps.push(entanglement::concurrence(&rho)? - entanglement::concurrence(&before)?);
                    }
                    let increase = gaps.iter().copied().reduce(f64::max).unwrap_or(0.0);
                    out.metric("max_entanglement_increase", increase);
                    out.require(increase <= tol, l, "entanglement does not increase", increase);
                    if unitary {
                        let spread = gaps.iter().map(|g| g.abs()).fold(0.0, f64::max);
                        out.metric("equality_trials", 1.0);
                        out.metric("max_unitary_channel_gap", spread);
                        out.require(spread <= tol, l, "unitary channel preserves entanglement", spread);
                    }
                }
            }
            (TrialFamily::SeparableBlocks, AnyState::Mixed(rho)) => {
                for l in self.other_frames(k) {
                    let phys = self.transform(k, l).apply_mixed(rho)?.physical_density().map_err(QrfError::from)?;
                    let neg = self.max_cut_negativity(&phys)?;
                    out.metric("max_physical_negativity", neg);
                    out.require(neg <= tol, l, "physical state is PPT across every cut", neg);
                }
            }
            (TrialFamily::MixedStandard, AnyState::Mixed(rho)) => {
                let before = rho.physical_density().map_err(QrfError::from)?;
                for l in self.other_frames(k) {
                    let phys = self.transform(k, l).apply_mixed(rho)?.physical_density().map_err(QrfError::from)?;
                    let mut gaps = Vec::with_capacity(self.cuts.len());
                    for cut in &self.cuts {
                        gaps.push(entanglement::negativity(&phys, cut)? - entanglement::negativity(&before, cut)?);
                    }
                    let increase = gaps.into_iter().reduce(f64::max).unwrap_or(0.0);
                    out.metric("max_entanglement_increase", increase);
                    out.require(increase <= tol, l, "negativity does not increase", increase);
                }
            }
            (TrialFamily::OracleDomain, AnyState::Pure(psi)) => {
                let v = psi.amplitudes();
                let same = linalg::max_abs_diff_vec(&self.transform(k, k).apply_structured(v), v);
                out.metric("max_trivial_hop_deviation", same);
                out.require(same <= tol, k, "trivial hop leaves domain states unchanged", same);
                for l in self.other_frames(k) {
                    let t = self.transform(k, l);
                    let dense = self
                        .dense
                        .get(k - 1)
                        .and_then(|row| row.get(l - 1))
                        .ok_or_else(|| VerifyError::Config("dense operators are built for the oracle suite only".into()))?;
                    let dev = linalg::max_abs_diff_vec(&t.apply_structured(v), &(dense * v));
                    out.metric("max_oracle_deviation", dev);
                    out.require(dev <= tol, l, "structured transform matches the dense operator", dev);
                    let (dom, cod) = t.isometry_residuals();
                    let res = dom.max(cod);
                    out.metric("max_isometry_residual", res);
                    out.require(res <= tol, l, "partial isometry identities hold", res);
                }
            }
            (family, _) => {
                return Err(VerifyError::Config(format!("{family:?} inputs have the wrong state type")));
            }
        }
        Ok(out)
    }

    /// Largest `1 − purity` of a single-factor marginal over all nonzero
    /// conditional states.
    fn max_conditional_impurity(&self, psi: &PureState) -> Result<f64, VerifyError> {
        let dec = ConditionalDecomposition::of(psi).map_err(QrfError::from)?;
        let factors = self.config.physical_reps().len();
        let mut worst: f64 = 0.0;
        for (_, _, state) in dec.nonzero() {
            for p in 0..factors {
                worst = worst.max(1.0 - entanglement::single_factor_purity(state, p));
            }
        }
        Ok(worst)
    }

    fn max_cut_negativity(&self, rho: &DensityOp) -> Result<f64, VerifyError> {
        let mut worst: f64 = 0.0;
        for cut in &self.cuts {
            worst = worst.max(entanglement::negativity(rho, cut)?);
        }
        Ok(worst)
    }
}

/// `Π_kl Σ_g (1_k ⊗ |g⁻¹⟩⟨g|_l ⊗ ⊗_{i≠k,l} V_i†(g) ⊗ 𝒰†(g)) · P_{g_k=e}` built
/// from Kronecker products. Frame factors use `V†(g)|x⟩ = |g⁻¹x⟩` read off
/// the multiplication table; `k == l` gives the domain projector.
pub fn dense_oracle_operator(config: &FrameConfig, k: usize, l: usize) -> CMatrix {
    let group = config.group();
    let n = group.order();
    let m = config.frames();
    let e = group.identity();
    let ket_bra = |a: usize, b: usize| {
        let mut op = CMatrix::zeros(n, n);
        op[(a, b)] = linalg::ONE;
        op
    };
    let v_dagger = |g: GroupElement| {
        let mut op = CMatrix::zeros(n, n);
        let gi = group.inv(g);
        for x in group.elements() {
            op[(group.mul(gi, x).index(), x.index())] = linalg::ONE;
        }
        op
    };
    let dp = config.physical_dim();
    let mut projector_parts: Vec<CMatrix> = (1..=m)
        .map(|i| if i == k { ket_bra(e.index(), e.index()) } else { linalg::identity(n) })
        .collect();
    projector_parts.push(linalg::identity(dp));
    let projector = linalg::kron_all(&projector_parts);
    if k == l {
        return projector;
    }
    let total = config.total_dim();
    let mut sum = CMatrix::zeros(total, total);
    for g in group.elements() {
        let mut parts: Vec<CMatrix> = (1..=m)
            .map(|i| {
                if i == k {
                    linalg::identity(n)
                } else if i == l {
                    ket_bra(group.inv(g).index(), g.index())
                } else {
                    v_dagger(g)
                }
            })
            .collect();
        parts.push(config.physical_dagger(g).clone());
        sum += linalg::kron_all(&parts);
    }
    let mut dims = vec![n; m];
    dims.extend(config.physical_dims());
    let mut order: Vec<usize> = (0..dims.len()).collect();
    order.swap(k - 1, l - 1);
    linalg::factor_permutation(&dims, &order) * sum * projector
}

fn finish(
    spec: &SuiteSpec,
    attempted: usize,
    outcomes: Vec<(usize, TrialInput, Outcome)>,
    exhausted: bool,
    started: Instant,
) -> VerificationReport {
    let mut metrics: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    let trials_run = outcomes.len();
    for (trial, input, outcome) in outcomes {
        for (name, value) in outcome.metrics {
            if name == "equality_trials" {
                *metrics.entry(name.into()).or_insert(0.0) += value;
                continue;
            }
            let entry = metrics.entry(name.into()).or_insert(value);
            *entry = if name.starts_with("min_") { entry.min(value) } else { entry.max(value) };
        }
        for v in outcome.violations {
            failures.push(Failure {
                seed_offset: trial as u64,
                predicate: v.predicate,
                measured: v.measured,
                to: v.to,
                input: input.clone(),
            });
        }
    }
    failures.sort_by_key(|f| f.seed_offset);
    let passed = failures.is_empty() && !exhausted;
    let verdict = if passed {
        format!("PASS: 0 failures in {trials_run} trials")
    } else if exhausted && failures.is_empty() {
        format!(
            "FAIL: only {trials_run} of {} trials accepted within {attempted} samples",
            spec.trials
        )
    } else {
        format!("FAIL: {} failures in {trials_run} trials ({BUG_NOTE})", failures.len())
    };
    VerificationReport {
        schema: VERIFY_SCHEMA.into(),
        suite: spec.suite,
        spec: spec.clone(),
        trials_run,
        attempted,
        passed,
        verdict,
        metrics,
        failures,
        wall_time: WallTime(started.elapsed()),
    }
}

fn run_trial(ctx: &SuiteContext, trial: usize) -> Result<Option<(usize, TrialInput, Outcome)>, VerifyError> {
    match ctx.sample(trial)? {
        Some(input) => {
            let outcome = ctx.evaluate(&input)?;
            Ok(Some((trial, input, outcome)))
        }
        None => Ok(None),
    }
}

/// Runs the suite named by `spec.suite`.
pub fn run_suite(spec: &SuiteSpec) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    let ctx = SuiteContext::new(spec)?;
    if spec.suite != SuiteKind::Corollary {
        let outcomes = (0..spec.trials)
            .into_par_iter()
            .map(|i| run_trial(&ctx, i))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        return Ok(finish(spec, spec.trials, outcomes, false, started));
    }
    let budget = spec.trials.saturating_mul(COROLLARY_ATTEMPTS_PER_TRIAL);
    let mut accepted = Vec::with_capacity(spec.trials);
    let mut attempted = 0;
    while accepted.len() < spec.trials && attempted < budget {
        let end = (attempted + COROLLARY_BATCH).min(budget);
        let batch = (attempted..end)
            .into_par_iter()
            .map(|i| run_trial(&ctx, i))
            .collect::<Result<Vec<_>, _>>()?;
        for item in batch {
            attempted += 1;
            if let Some(done) = item {
                accepted.push(done);
                if accepted.len() == spec.trials {
                    break;
                }
            }
        }
    }
    let exhausted = accepted.len() < spec.trials;
    Ok(finish(spec, attempted, accepted, exhausted, started))
}

pub fn run_theorem_suite(spec: &SuiteSpec) -> Result<VerificationReport, VerifyError> {
    run_kind(spec, SuiteKind::Theorem)
}

pub fn run_corollary_suite(spec: &SuiteSpec) -> Result<VerificationReport, VerifyError> {
    run_kind(spec, SuiteKind::Corollary)
}

pub fn run_no_creation_suite(spec: &SuiteSpec) -> Result<VerificationReport, VerifyError> {
    run_kind(spec, SuiteKind::NoCreation)
}

pub fn run_monotonicity_suite(spec: &SuiteSpec) -> Result<VerificationReport, VerifyError> {
    run_kind(spec, SuiteKind::Monotonicity)
}

pub fn run_mixed_suite(spec: &SuiteSpec) -> Result<VerificationReport, VerifyError> {
    run_kind(spec, SuiteKind::Mixed)
}

pub fn run_oracle_suite(spec: &SuiteSpec) -> Result<VerificationReport, VerifyError> {
    run_kind(spec, SuiteKind::Oracle)
}

fn run_kind(spec: &SuiteSpec, kind: SuiteKind) -> Result<VerificationReport, VerifyError> {
    let mut spec = spec.clone();
    spec.suite = kind;
    run_suite(&spec)
}

/// Re-evaluates a recorded failure from its serialized input.
pub fn reproduce(spec: &SuiteSpec, failure: &Failure) -> Result<Vec<Violation>, VerifyError> {
    SuiteContext::new(spec)?.check(&failure.input)
}
