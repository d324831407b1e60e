//! Scenario files: a configuration, an initial state and a list of actions.
//!
//! Scenarios are JSON documents tagged with [`SCENARIO_SCHEMA`]; the format
//! is described in `docs/scenario-format.md` at the repository root.
//! Running one threads the state through the transforms in order and
//! records every measurement in a [`RunReport`], which renders either as
//! aligned text or as JSON tagged with [`REPORT_SCHEMA`].

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entanglement::{self, Bipartition, PptVerdict};
use crate::group::GroupSpec;
use crate::hilbert::{AnyState, ConditionalDecomposition, PureState};
use crate::linalg::{self, CVector};
use crate::qrf::{self, ConfigSpec, FrameConfig, QrfTransform, StandardFormCheck};
use crate::repr::RepSpec;
use crate::verify::{self, SuiteContext, SuiteSpec, VerificationReport};

pub const SCENARIO_SCHEMA: &str = "qrflab.scenario/1";
pub const REPORT_SCHEMA: &str = "qrflab.report/1";

pub const BUILTIN_SCENARIOS: [(&str, &str); 2] = [
    ("example1", include_str!("../scenarios/example1.json")),
    ("example2", include_str!("../scenarios/example2.json")),
];

const STATE_TOL: f64 = 1e-12;
const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("check failed at action {action} ({label})")]
    CheckFailure { action: usize, label: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Validation { field: field.into(), message: message.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub group: GroupSpec,
    pub frames: usize,
    #[serde(default)]
    pub physical: Vec<RepSpec>,
    pub state: StateSource,
    #[serde(default)]
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    /// One label per factor, frames first.
    pub labels: Vec<usize>,
    pub amplitude: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSource {
    Example {
        example: String,
    },
    Dense {
        amplitudes: Vec<[f64; 2]>,
        #[serde(default)]
        normalize: bool,
    },
    Sparse {
        terms: Vec<Term>,
        #[serde(default)]
        normalize: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformStyle {
    #[default]
    Perspectival,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Zero,
    Positive,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalExpect {
    AllSeparable,
    SomeEntangled,
}

fn state_tol() -> f64 {
    STATE_TOL
}

fn check_tol() -> f64 {
    CHECK_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Transform {
        from: usize,
        to: usize,
        #[serde(default)]
        kind: TransformStyle,
    },
    ExpectState {
        state: StateSource,
        #[serde(default = "state_tol")]
        tol: f64,
    },
    StandardForm {
        frame: usize,
        #[serde(default)]
        expect: Option<bool>,
        #[serde(default = "check_tol")]
        tol: f64,
    },
    Conditionals {
        #[serde(default)]
        expect: Option<ConditionalExpect>,
        #[serde(default = "check_tol")]
        tol: f64,
    },
    /// `side_a` holds physical-system positions (0-based); omitted means
    /// every cut.
    Negativity {
        #[serde(default)]
        side_a: Option<Vec<usize>>,
        #[serde(default)]
        expect: Option<Expect>,
        #[serde(default = "check_tol")]
        tol: f64,
    },
    Concurrence {
        #[serde(default)]
        expect: Option<Expect>,
        #[serde(default = "check_tol")]
        tol: f64,
    },
    Suite {
        spec: SuiteSpec,
    },
}

impl Action {
    pub fn label(&self) -> String {
        match self {
            Action::Transform { from, to, kind } => {
                let kind = match kind {
                    TransformStyle::Perspectival => "perspectival",
                    TransformStyle::Passive => "passive",
                };
                format!("transform {kind} {from}->{to}")
            }
            Action::ExpectState { .. } => "expect_state".into(),
            Action::StandardForm { frame, .. } => format!("standard_form frame {frame}"),
            Action::Conditionals { .. } => "conditionals".into(),
            Action::Negativity { side_a: Some(a), .. } => format!("negativity side_a {a:?}"),
            Action::Negativity { side_a: None, .. } => "negativity all cuts".into(),
            Action::Concurrence { .. } => "concurrence".into(),
            Action::Suite { spec } => format!("suite {}", spec.suite),
        }
    }
}

/// Overrides applied on top of a scenario, usually from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
}

impl RunOptions {
    pub fn apply_to_suite(&self, spec: &mut SuiteSpec) {
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
        if let Some(tol) = self.tol {
            spec.tolerance = tol;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub ket: String,
    pub state: AnyState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalSummary {
    pub tuple: Vec<usize>,
    pub weight: [f64; 2],
    /// Smallest single-system purity of the conditional state.
    pub min_purity: f64,
    pub separable: bool,
    pub ket: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutValue {
    pub cut: String,
    pub value: f64,
    pub verdict: PptVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    State { state: StateSummary },
    Comparison { distance: f64, tol: f64 },
    StandardForm { frame: usize, standard: bool, detail: String },
    Conditionals { entries: Vec<ConditionalSummary> },
    Negativity { cuts: Vec<CutValue>, max: f64 },
    Concurrence { value: f64 },
    Suite { report: VerificationReport },
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    pub index: usize,
    pub label: String,
    pub status: Status,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub scenario: String,
    pub group: String,
    pub frames: usize,
    pub initial: StateSummary,
    pub actions: Vec<ActionReport>,
    pub passed: bool,
}

impl RunReport {
    pub fn first_failure(&self) -> Option<ScenarioError> {
        self.actions.iter().find(|a| a.status == Status::Fail).map(|a| ScenarioError::CheckFailure {
            action: a.index,
            label: a.label.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(parse_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Human,
    Machine,
}

fn parse_error(e: serde_json::Error) -> ScenarioError {
    ScenarioError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(parse_error)?;
    if scenario.schema != SCENARIO_SCHEMA {
        return Err(invalid("schema", format!("expected {SCENARIO_SCHEMA:?}, got {:?}", scenario.schema)));
    }
    Ok(scenario)
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text).expect("builtin scenarios parse"))
}

/// A builtin name or a path to a scenario file.
pub fn load_scenario(arg: &str) -> Result<Scenario, ScenarioError> {
    if let Some(s) = builtin_scenario(arg) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(Path::new(arg))
        .map_err(|e| ScenarioError::Io { path: arg.into(), message: e.to_string() })?;
    parse_scenario(&text)
}

/// `|0⟩|+⟩|00⟩`: frame 1 at the identity, frame 2 in superposition.
fn example1_state(config: &FrameConfig) -> Result<PureState, ScenarioError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    sparse_state(config, &[(vec![0, 0, 0, 0], linalg::c(h, 0.0)), (vec![0, 1, 0, 0], linalg::c(h, 0.0))], false)
}

/// `(|0⟩|0⟩Φ_{+i} + i|0⟩|1⟩Φ_{−i})/√2` with `Φ_α = (|00⟩ + α|11⟩)/√2`.
fn example2_state(config: &FrameConfig) -> Result<PureState, ScenarioError> {
    let terms = [
        (vec![0, 0, 0, 0], linalg::c(0.5, 0.0)),
        (vec![0, 0, 1, 1], linalg::c(0.0, 0.5)),
        (vec![0, 1, 0, 0], linalg::c(0.0, 0.5)),
        (vec![0, 1, 1, 1], linalg::c(0.5, 0.0)),
    ];
    sparse_state(config, &terms, false)
}

fn sparse_state(config: &FrameConfig, terms: &[(Vec<usize>, Complex64)], normalize: bool) -> Result<PureState, ScenarioError> {
    let dims = config.spec().dims();
    let mut amps = CVector::zeros(config.total_dim());
    for (i, (labels, amp)) in terms.iter().enumerate() {
        if labels.len() != dims.len() || labels.iter().zip(&dims).any(|(l, d)| l >= d) {
            return Err(invalid(
                format!("state.terms[{i}]"),
                format!("labels {labels:?} do not fit factor dims {dims:?}"),
            ));
        }
        amps[linalg::flatten(labels, &dims)] += amp;
    }
    finish_state(config, amps, normalize)
}

fn finish_state(config: &FrameConfig, amps: CVector, normalize: bool) -> Result<PureState, ScenarioError> {
    let spec = config.spec().clone();
    let built = if normalize { PureState::normalized(amps, spec) } else { PureState::new(amps, spec) };
    built.map_err(|e| invalid("state", e))
}

fn resolve_state(config: &FrameConfig, source: &StateSource) -> Result<PureState, ScenarioError> {
    match source {
        StateSource::Example { example } => {
            let dims = config.spec().dims();
            if dims != [2, 2, 2, 2] {
                return Err(invalid(
                    "state",
                    format!("{example} lives on four qubits, configuration has dims {dims:?}"),
                ));
            }
            match example.as_str() {
                "example1" => example1_state(config),
                "example2" => example2_state(config),
                other => Err(invalid("state", format!("unknown example state {other:?}"))),
            }
        }
        StateSource::Dense { amplitudes, normalize } => {
            if amplitudes.len() != config.total_dim() {
                return Err(invalid(
                    "state.amplitudes",
                    format!("expected {} amplitudes, got {}", config.total_dim(), amplitudes.len()),
                ));
            }
            let amps = CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|[re, im]| linalg::c(*re, *im)));
            finish_state(config, amps, *normalize)
        }
        StateSource::Sparse { terms, normalize } => {
            let terms: Vec<(Vec<usize>, Complex64)> =
                terms.iter().map(|t| (t.labels.clone(), linalg::c(t.amplitude[0], t.amplitude[1]))).collect();
            sparse_state(config, &terms, *normalize)
        }
    }
}

/// `a|x⟩ + b|y⟩ …` over nonzero amplitudes, labels in factor order.
pub fn ket_string(psi: &PureState) -> String {
    let dims = psi.spec().dims();
    let compact = dims.iter().all(|&d| d <= 10);
    let mut out = String::new();
    for (i, z) in psi.amplitudes().iter().enumerate() {
        if z.norm() < STATE_TOL {
            continue;
        }
        let labels = linalg::unflatten(i, &dims);
        let ket = if compact {
            labels.iter().map(|l| l.to_string()).collect::<String>()
        } else {
            labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
        };
        let (re, im) = (clean(z.re), clean(z.im));
        let coeff = match (re == 0.0, im == 0.0) {
            (false, true) => format!("{re:+.4}"),
            (true, false) => format!("{im:+.4}i"),
            _ => format!("+({re:.4}{im:+.4}i)"),
        };
        let _ = write!(out, "{}{coeff}|{ket}>", if out.is_empty() { "" } else { " " });
    }
    out
}

fn clean(x: f64) -> f64 {
    if x.abs() < STATE_TOL { 0.0 } else { x }
}

fn summarize(state: &AnyState) -> StateSummary {
    match state {
        AnyState::Pure(psi) => {
            let fixed = linalg::fix_global_phase(psi.amplitudes());
            let psi = PureState::new(fixed, psi.spec().clone()).expect("phase fix keeps the norm");
            StateSummary { ket: ket_string(&psi), state: AnyState::Pure(psi) }
        }
        AnyState::Mixed(rho) => StateSummary {
            ket: format!("mixed state, purity {:.6}", rho.purity()),
            state: state.clone(),
        },
    }
}

fn expect_holds(expect: Option<Expect>, value: f64, tol: f64) -> Status {
    match expect {
        None => Status::Info,
        Some(Expect::Zero) if value <= tol => Status::Pass,
        Some(Expect::Positive) if value > tol => Status::Pass,
        Some(Expect::Value(v)) if (value - v).abs() <= tol => Status::Pass,
        Some(_) => Status::Fail,
    }
}

struct Resolved {
    config: FrameConfig,
    initial: PureState,
}

fn validate(scenario: &Scenario, options: &RunOptions) -> Result<Resolved, ScenarioError> {
    let group = scenario.group.resolve().map_err(|e| invalid("group", e))?;
    if scenario.frames == 0 {
        return Err(invalid("frames", "at least one frame is required"));
    }
    let mut reps = Vec::with_capacity(scenario.physical.len());
    for (i, r) in scenario.physical.iter().enumerate() {
        reps.push(r.resolve(&group).map_err(|e| invalid(format!("physical[{i}]"), e))?);
    }
    let config = ConfigSpec { group: scenario.group.clone(), frames: scenario.frames, physical: scenario.physical.clone() }
        .resolve()
        .map_err(|e| invalid("physical", e))?;
    let initial = resolve_state(&config, &scenario.state)?;
    let m = scenario.frames;
    let n = config.physical_reps().len();
    let frame_ok = |f: usize| (1..=m).contains(&f);
    for (i, action) in scenario.actions.iter().enumerate() {
        let field = |name: &str| format!("actions[{i}].{name}");
        match action {
            Action::Transform { from, to, .. } => {
                for (name, f) in [("from", *from), ("to", *to)] {
                    if !frame_ok(f) {
                        return Err(invalid(field(name), format!("frame {f} not in 1..={m}")));
                    }
                }
                if from == to {
                    return Err(invalid(field("to"), "source and target frames coincide"));
                }
            }
            Action::ExpectState { state, .. } => {
                resolve_state(&config, state).map_err(|e| match e {
                    ScenarioError::Validation { field: f, message } => invalid(field(&f), message),
                    other => other,
                })?;
            }
            Action::StandardForm { frame, .. } if !frame_ok(*frame) => {
                return Err(invalid(field("frame"), format!("frame {frame} not in 1..={m}")));
            }
            Action::Negativity { side_a: Some(side), .. } => {
                Bipartition::complement(side.clone(), n).map_err(|e| invalid(field("side_a"), e))?;
            }
            Action::Negativity { side_a: None, .. } if n < 2 => {
                return Err(invalid(field("side_a"), "negativity needs at least two physical systems"));
            }
            Action::Concurrence { .. } if config.physical_dims() != [2, 2] => {
                return Err(invalid(
                    "actions",
                    format!("action {} needs two physical qubits, got dims {:?}", i + 1, config.physical_dims()),
                ));
            }
            Action::Suite { spec } => {
                let mut spec = spec.clone();
                options.apply_to_suite(&mut spec);
                SuiteContext::new(&spec).map_err(|e| invalid(field("spec"), e))?;
            }
            _ => {}
        }
    }
    Ok(Resolved { config, initial })
}

/// Executes `scenario` and collects one report row per action. A failing
/// expectation marks its row `FAIL`; execution errors stop the run.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunReport, ScenarioError> {
    let Resolved { config, initial } = validate(scenario, options)?;
    let initial = AnyState::Pure(initial);
    let mut state = initial.clone();
    let mut rows = Vec::with_capacity(scenario.actions.len());
    for (i, action) in scenario.actions.iter().enumerate() {
        let (status, outcome) = match execute(&config, &mut state, action, options) {
            Ok(done) => done,
            Err(message) => (Status::Fail, Outcome::Error { message }),
        };
        let stop = matches!(outcome, Outcome::Error { .. });
        rows.push(ActionReport { index: i + 1, label: action.label(), status, outcome });
        if stop {
            break;
        }
    }
    let passed = rows.iter().all(|r| r.status != Status::Fail);
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        scenario: scenario.name.clone(),
        group: scenario.group.to_string(),
        frames: scenario.frames,
        initial: summarize(&initial),
        actions: rows,
        passed,
    })
}

fn execute(
    config: &FrameConfig,
    state: &mut AnyState,
    action: &Action,
    options: &RunOptions,
) -> Result<(Status, Outcome), String> {
    let tol_of = |t: f64| options.tol.unwrap_or(t);
    match action {
        Action::Transform { from, to, kind } => {
            let t: QrfTransform = match kind {
                TransformStyle::Perspectival => qrf::build_perspectival_transform(config, *from, *to),
                TransformStyle::Passive => qrf::build_passive_transform(config, *from, *to),
            }
            .map_err(|e| e.to_string())?;
            *state = match state {
                AnyState::Pure(psi) => AnyState::Pure(t.apply(psi).map_err(|e| e.to_string())?),
                AnyState::Mixed(rho) => AnyState::Mixed(t.apply_mixed(rho).map_err(|e| e.to_string())?),
            };
            Ok((Status::Info, Outcome::State { state: summarize(state) }))
        }
        Action::ExpectState { state: expected, tol } => {
            let tol = tol_of(*tol);
            let expected = resolve_state(config, expected).map_err(|e| e.to_string())?;
            let distance = match state {
                AnyState::Pure(psi) => psi.distance_up_to_phase(&expected),
                AnyState::Mixed(rho) => linalg::max_abs_diff(rho.matrix(), expected.to_density().matrix()),
            };
            let status = if distance <= tol { Status::Pass } else { Status::Fail };
            Ok((status, Outcome::Comparison { distance, tol }))
        }
        Action::StandardForm { frame, expect, tol } => {
            let check = qrf::standard_form_check(config, state, *frame, tol_of(*tol)).map_err(|e| e.to_string())?;
            let (standard, detail) = match &check {
                StandardFormCheck::Standard(form) => {
                    let phys = summarize(&form.physical_part);
                    (true, format!("physical part {}", phys.ket))
                }
                StandardFormCheck::NotStandard { reason } => (false, reason.clone()),
            };
            let status = match expect {
                None => Status::Info,
                Some(e) if *e == standard => Status::Pass,
                Some(_) => Status::Fail,
            };
            Ok((status, Outcome::StandardForm { frame: *frame, standard, detail }))
        }
        Action::Conditionals { expect, tol } => {
            let AnyState::Pure(psi) = state else {
                return Err("conditional states need a pure state".into());
            };
            let tol = tol_of(*tol);
            let dec = ConditionalDecomposition::of(psi).map_err(|e| e.to_string())?;
            let factors = config.physical_reps().len();
            let entries: Vec<ConditionalSummary> = dec
                .nonzero()
                .map(|(tuple, weight, cond)| {
                    let min_purity = (0..factors)
                        .map(|p| entanglement::single_factor_purity(cond, p))
                        .fold(1.0, f64::min);
                    ConditionalSummary {
                        tuple: tuple.to_vec(),
                        weight: [weight.re, weight.im],
                        min_purity,
                        separable: min_purity >= 1.0 - tol,
                        ket: ket_string(cond),
                    }
                })
                .collect();
            let any_entangled = entries.iter().any(|e| !e.separable);
            let status = match expect {
                None => Status::Info,
                Some(ConditionalExpect::AllSeparable) if !any_entangled => Status::Pass,
                Some(ConditionalExpect::SomeEntangled) if any_entangled => Status::Pass,
                Some(_) => Status::Fail,
            };
            Ok((status, Outcome::Conditionals { entries }))
        }
        Action::Negativity { side_a, expect, tol } => {
            let tol = tol_of(*tol);
            let rho = physical_density(state)?;
            let n = config.physical_reps().len();
            let cuts = match side_a {
                Some(side) => vec![Bipartition::complement(side.clone(), n).map_err(|e| e.to_string())?],
                None => Bipartition::all(n),
            };
            let mut values = Vec::with_capacity(cuts.len());
            for cut in &cuts {
                values.push(CutValue {
                    cut: cut.to_string(),
                    value: entanglement::negativity(&rho, cut).map_err(|e| e.to_string())?,
                    verdict: entanglement::ppt_verdict(&rho, cut, tol).map_err(|e| e.to_string())?,
                });
            }
            let max = values.iter().map(|v| v.value).fold(0.0, f64::max);
            Ok((expect_holds(*expect, max, tol), Outcome::Negativity { cuts: values, max }))
        }
        Action::Concurrence { expect, tol } => {
            let rho = physical_density(state)?;
            let value = entanglement::concurrence(&rho).map_err(|e| e.to_string())?;
            Ok((expect_holds(*expect, value, tol_of(*tol)), Outcome::Concurrence { value }))
        }
        Action::Suite { spec } => {
            let mut spec = spec.clone();
            options.apply_to_suite(&mut spec);
            let report = verify::run_suite(&spec).map_err(|e| e.to_string())?;
            let status = if report.passed { Status::Pass } else { Status::Fail };
            Ok((status, Outcome::Suite { report }))
        }
    }
}

fn physical_density(state: &AnyState) -> Result<crate::hilbert::DensityOp, String> {
    match state {
        AnyState::Pure(psi) => psi.physical_density(),
        AnyState::Mixed(rho) => rho.physical_density(),
    }
    .map_err(|e| e.to_string())
}

fn outcome_summary(outcome: &Outcome) -> String {
    match outcome {
        Outcome::State { state } => state.ket.clone(),
        Outcome::Comparison { distance, tol } => format!("distance {distance:.3e} (tol {tol:.0e})"),
        Outcome::StandardForm { standard, detail, .. } => {
            format!("{}: {detail}", if *standard { "standard" } else { "not standard" })
        }
        Outcome::Conditionals { entries } => entries
            .iter()
            .map(|e| {
                let t: Vec<String> = e.tuple.iter().map(|x| x.to_string()).collect();
                format!("({}) {}", t.join(","), if e.separable { "product" } else { "entangled" })
            })
            .collect::<Vec<_>>()
            .join("; "),
        Outcome::Negativity { cuts, .. } => cuts
            .iter()
            .map(|c| format!("{} {:.9} {}", c.cut, c.value, c.verdict))
            .collect::<Vec<_>>()
            .join("; "),
        Outcome::Concurrence { value } => format!("{value:.9}"),
        Outcome::Suite { report } => report.verdict.clone(),
        Outcome::Error { message } => format!("error: {message}"),
    }
}

fn render_human(report: &RunReport) -> String {
    let mut out = String::new();
    let name = if report.scenario.is_empty() { "(unnamed)" } else { &report.scenario };
    let _ = writeln!(
        out,
        "scenario {name}  group {}  frames {}  [{}]",
        report.group, report.frames, report.schema
    );
    let _ = writeln!(out, "initial  {}", report.initial.ket);
    let rows: Vec<[String; 4]> = report
        .actions
        .iter()
        .map(|a| {
            let status = match a.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "-",
            };
            [a.index.to_string(), a.label.clone(), outcome_summary(&a.outcome), status.to_string()]
        })
        .collect();
    let header = ["#".to_string(), "action".into(), "result".into(), "status".into()];
    let mut widths = [0usize; 4];
    for row in std::iter::once(&header).chain(&rows) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    for row in std::iter::once(&header).chain(&rows) {
        let _ = writeln!(
            out,
            "{:>w0$}  {:<w1$}  {:<w2$}  {}",
            row[0],
            row[1],
            row[2],
            row[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2]
        );
    }
    for a in &report.actions {
        if let Outcome::Suite { report } = &a.outcome {
            let _ = writeln!(out, "\n[{}] {}", a.index, report);
        }
    }
    let _ = write!(out, "{}", if report.passed { "PASS" } else { "FAIL" });
    out
}

pub fn emit_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Human => render_human(report),
        ReportFormat::Machine => report.to_json(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str) -> RunReport {
        run_scenario(&builtin_scenario(name).unwrap(), &RunOptions::default()).unwrap()
    }

    #[test]
    fn builtins_pass() {
        for (name, _) in BUILTIN_SCENARIOS {
            let report = run(name);
            assert!(report.passed, "{}", emit_report(&report, ReportFormat::Human));
        }
    }

    #[test]
    fn example2_human_report_mentions_concurrence_and_pass() {
        let text = emit_report(&run("example2"), ReportFormat::Human);
        assert!(text.contains("concurrence"));
        assert!(text.contains("PASS"));
    }

    #[test]
    fn machine_report_round_trips() {
        let report = run("example1");
        let back = RunReport::from_json(&emit_report(&report, ReportFormat::Machine)).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn unknown_group_is_a_validation_error() {
        let mut s = builtin_scenario("example1").unwrap();
        s.group = GroupSpec::named("Z5x");
        match run_scenario(&s, &RunOptions::default()) {
            Err(ScenarioError::Validation { field, message }) => {
                assert_eq!(field, "group");
                assert!(message.contains("Z5x"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_scenario("{\n  \"schema\": \"qrflab.scenario/1\",\n  \"group\": 3,\n}") {
            Err(ScenarioError::Parse { line, .. }) => assert!(line >= 3),
            other => panic!("unexpected {other:?}"),
        }
        let wrong = BUILTIN_SCENARIOS[0].1.replace("qrflab.scenario/1", "qrflab.scenario/0");
        assert!(matches!(parse_scenario(&wrong), Err(ScenarioError::Validation { .. })));
    }

    #[test]
    fn failing_expectation_is_reported() {
        let mut s = builtin_scenario("example2").unwrap();
        s.actions.push(Action::Concurrence { expect: Some(Expect::Zero), tol: CHECK_TOL });
        let report = run_scenario(&s, &RunOptions::default()).unwrap();
        assert!(!report.passed);
        assert_eq!(
            report.first_failure(),
            Some(ScenarioError::CheckFailure { action: s.actions.len(), label: "concurrence".into() })
        );
    }

    #[test]
    fn invalid_actions_name_the_field() {
        let mut s = builtin_scenario("example1").unwrap();
        s.actions = vec![Action::Transform { from: 1, to: 3, kind: TransformStyle::Passive }];
        assert!(matches!(
            run_scenario(&s, &RunOptions::default()),
            Err(ScenarioError::Validation { field, .. }) if field == "actions[0].to"
        ));
        s.actions = vec![Action::Negativity { side_a: Some(vec![0, 1]), expect: None, tol: CHECK_TOL }];
        assert!(matches!(
            run_scenario(&s, &RunOptions::default()),
            Err(ScenarioError::Validation { field, .. }) if field == "actions[0].side_a"
        ));
    }

    #[test]
    fn passive_transform_outside_domain_stops_the_run() {
        let mut s = builtin_scenario("example1").unwrap();
        s.actions = vec![
            Action::Transform { from: 2, to: 1, kind: TransformStyle::Passive },
            Action::Concurrence { expect: None, tol: CHECK_TOL },
        ];
        let report = run_scenario(&s, &RunOptions::default()).unwrap();
        assert_eq!(report.actions.len(), 1);
        assert!(matches!(report.actions[0].outcome, Outcome::Error { .. }));
        assert!(!report.passed);
    }

    #[test]
    fn suite_actions_take_overrides() {
        let mut s = builtin_scenario("example1").unwrap();
        s.actions = vec![Action::Suite { spec: SuiteSpec::builtin(verify::SuiteKind::Theorem) }];
        let opts = RunOptions { seed: Some(99), trials: Some(4), tol: None };
        let report = run_scenario(&s, &opts).unwrap();
        let Outcome::Suite { report: suite } = &report.actions[0].outcome else { panic!() };
        assert_eq!((suite.spec.seed, suite.trials_run), (99, 4));
        assert_eq!(report.to_json(), run_scenario(&s, &opts).unwrap().to_json());
    }

    #[test]
    fn ket_rendering() {
        let report = run("example1");
        assert_eq!(report.initial.ket, "+0.7071|0000> +0.7071|0100>");
        let Outcome::State { state } = &report.actions[2].outcome else { panic!() };
        assert_eq!(state.ket, "+0.7071|0000> +0.7071|1011>");
    }
}
