//! C ABI for qrflab.
//!
//! Objects cross the boundary as opaque handles that the caller owns and
//! releases with the matching `*_free` function. Every fallible call returns
//! a [`QrfStatus`]; on failure [`qrf_last_error`] describes the problem.
//! Strings returned through out-parameters are freed with
//! [`qrf_string_free`]. Frame indices are 1-based; complex arrays are
//! interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qrflab::entanglement::{self, Bipartition};
use qrflab::group::{FiniteGroup, GroupElement, GroupSpec};
use qrflab::hilbert::PureState;
use qrflab::linalg::{self, CVector};
use qrflab::qrf::{self, ConfigSpec, FrameConfig, QrfError};
use qrflab::repr::RepSpec;
use qrflab::scenario::{self, RunOptions, ScenarioError};
use qrflab::verify::{self, SuiteSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    DimensionMismatch = 5,
    DomainViolation = 6,
    /// The call ran but a check it evaluated failed; outputs are still set.
    CheckFailed = 7,
    Panic = 8,
}

/// Which frame-change operator to build.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrfTransformKind {
    Perspectival = 0,
    Passive = 1,
}

pub struct QrfGroup(FiniteGroup);
pub struct QrfConfig(FrameConfig);
pub struct QrfState(PureState);
pub struct QrfTransform(qrflab::QrfTransform);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

fn fail(status: QrfStatus, message: impl Into<String>) -> QrfStatus {
    set_error(message);
    status
}

fn qrf_status(e: &QrfError) -> QrfStatus {
    match e {
        QrfError::DomainViolation { .. } => QrfStatus::DomainViolation,
        QrfError::DimensionMismatch { .. } => QrfStatus::DimensionMismatch,
        _ => QrfStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> QrfStatus) -> QrfStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(QrfStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, QrfStatus> {
    if p.is_null() {
        return Err(fail(QrfStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(QrfStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> QrfStatus {
    if out.is_null() {
        return fail(QrfStatus::NullPointer, "null output pointer");
    }
    out.write(value);
    QrfStatus::Ok
}

fn into_c_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! deref {
    ($p:expr) => {
        match $p.as_ref() {
            Some(v) => v,
            None => return fail(QrfStatus::NullPointer, concat!("null handle: ", stringify!($p))),
        }
    };
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn qrf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qrf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qrf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a group from a builtin name such as `"Z3"`, `"Z2xZ2"` or `"S3"`.
///
/// # Safety
/// `name` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qrf_group_new_named(name: *const c_char, out: *mut *mut QrfGroup) -> QrfStatus {
    guard(|| {
        let name = try_ffi!(read_str(name));
        match GroupSpec::named(name).resolve() {
            Ok(g) => write_out(out, Box::into_raw(Box::new(QrfGroup(g)))),
            Err(e) => fail(QrfStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Builds a group from a row-major `order × order` multiplication table.
///
/// # Safety
/// `table` must point to `order * order` readable values and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_group_new_table(table: *const usize, order: usize, out: *mut *mut QrfGroup) -> QrfStatus {
    guard(|| {
        if table.is_null() {
            return fail(QrfStatus::NullPointer, "null table");
        }
        let Some(len) = order.checked_mul(order) else {
            return fail(QrfStatus::InvalidArgument, "order overflows");
        };
        let flat = std::slice::from_raw_parts(table, len);
        let rows = flat.chunks(order.max(1)).map(<[usize]>::to_vec).collect();
        match FiniteGroup::from_table(rows) {
            Ok(g) => write_out(out, Box::into_raw(Box::new(QrfGroup(g)))),
            Err(e) => fail(QrfStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `group` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrf_group_free(group: *mut QrfGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// # Safety
/// `group` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_group_order(group: *const QrfGroup, out: *mut usize) -> QrfStatus {
    guard(|| write_out(out, deref!(group).0.order()))
}

unsafe fn element(group: &FiniteGroup, index: usize) -> Result<GroupElement, QrfStatus> {
    group.element(index).map_err(|e| fail(QrfStatus::InvalidArgument, e.to_string()))
}

/// Writes the index of `a·b`.
///
/// # Safety
/// `group` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_group_mul(group: *const QrfGroup, a: usize, b: usize, out: *mut usize) -> QrfStatus {
    guard(|| {
        let g = &deref!(group).0;
        let (a, b) = (try_ffi!(element(g, a)), try_ffi!(element(g, b)));
        write_out(out, g.mul(a, b).index())
    })
}

/// # Safety
/// `group` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_group_inverse(group: *const QrfGroup, a: usize, out: *mut usize) -> QrfStatus {
    guard(|| {
        let g = &deref!(group).0;
        let a = try_ffi!(element(g, a));
        write_out(out, g.inv(a).index())
    })
}

/// Builds `frames` regular reference frames plus physical systems described
/// by `physical_json`, a JSON array of representation specs such as
/// `["regular", "trivial(2)"]`. A null `physical_json` means no physical
/// systems.
///
/// # Safety
/// `group` must be a live handle, `physical_json` null or a valid C string,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_config_new(
    group: *const QrfGroup,
    frames: usize,
    physical_json: *const c_char,
    out: *mut *mut QrfConfig,
) -> QrfStatus {
    guard(|| {
        let g = &deref!(group).0;
        let specs: Vec<RepSpec> = if physical_json.is_null() {
            Vec::new()
        } else {
            let text = try_ffi!(read_str(physical_json));
            match serde_json::from_str(text) {
                Ok(v) => v,
                Err(e) => return fail(QrfStatus::ParseError, e.to_string()),
            }
        };
        let reps = match specs.iter().map(|s| s.resolve(g)).collect::<Result<Vec<_>, _>>() {
            Ok(r) => r,
            Err(e) => return fail(QrfStatus::InvalidArgument, e.to_string()),
        };
        match FrameConfig::new(g.clone(), frames, reps) {
            Ok(c) => write_out(out, Box::into_raw(Box::new(QrfConfig(c)))),
            Err(e) => fail(qrf_status(&e), e.to_string()),
        }
    })
}

/// Builds a configuration from a JSON object
/// `{"group": ..., "frames": m, "physical": [...]}`.
///
/// # Safety
/// `json` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_config_from_json(json: *const c_char, out: *mut *mut QrfConfig) -> QrfStatus {
    guard(|| {
        let text = try_ffi!(read_str(json));
        let spec: ConfigSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(QrfStatus::ParseError, e.to_string()),
        };
        match spec.resolve() {
            Ok(c) => write_out(out, Box::into_raw(Box::new(QrfConfig(c)))),
            Err(e) => fail(qrf_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrf_config_free(config: *mut QrfConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Dimension of the full Hilbert space.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_config_dim(config: *const QrfConfig, out: *mut usize) -> QrfStatus {
    guard(|| write_out(out, deref!(config).0.total_dim()))
}

/// Creates a state from `dim` interleaved amplitudes. With `normalize` set
/// the vector is rescaled; otherwise it must already have unit norm.
///
/// # Safety
/// `config` must be a live handle, `amplitudes` must hold `2 * dim`
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_state_new(
    config: *const QrfConfig,
    amplitudes: *const f64,
    dim: usize,
    normalize: bool,
    out: *mut *mut QrfState,
) -> QrfStatus {
    guard(|| {
        let cfg = &deref!(config).0;
        if amplitudes.is_null() {
            return fail(QrfStatus::NullPointer, "null amplitudes");
        }
        if dim != cfg.total_dim() {
            return fail(
                QrfStatus::DimensionMismatch,
                format!("expected {} amplitudes, got {dim}", cfg.total_dim()),
            );
        }
        let raw = std::slice::from_raw_parts(amplitudes, 2 * dim);
        let v = CVector::from_iterator(dim, raw.chunks(2).map(|p| linalg::c(p[0], p[1])));
        let spec = cfg.spec().clone();
        let built = if normalize { PureState::normalized(v, spec) } else { PureState::new(v, spec) };
        match built {
            Ok(s) => write_out(out, Box::into_raw(Box::new(QrfState(s)))),
            Err(e) => fail(QrfStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrf_state_free(state: *mut QrfState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_state_dim(state: *const QrfState, out: *mut usize) -> QrfStatus {
    guard(|| write_out(out, deref!(state).0.dim()))
}

/// Copies the amplitudes into `buffer` as `2 * dim` interleaved doubles.
///
/// # Safety
/// `state` must be a live handle and `buffer` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qrf_state_amplitudes(state: *const QrfState, buffer: *mut f64, len: usize) -> QrfStatus {
    guard(|| {
        let s = &deref!(state).0;
        if buffer.is_null() {
            return fail(QrfStatus::NullPointer, "null buffer");
        }
        if len < 2 * s.dim() {
            return fail(QrfStatus::DimensionMismatch, format!("buffer needs {} doubles", 2 * s.dim()));
        }
        let out = std::slice::from_raw_parts_mut(buffer, 2 * s.dim());
        for (pair, z) in out.chunks_mut(2).zip(s.amplitudes().iter()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        QrfStatus::Ok
    })
}

/// `1 − |⟨a|b⟩|`, zero iff the states agree up to a global phase.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_state_distance(a: *const QrfState, b: *const QrfState, out: *mut f64) -> QrfStatus {
    guard(|| {
        let (a, b) = (&deref!(a).0, &deref!(b).0);
        if a.spec() != b.spec() {
            return fail(QrfStatus::DimensionMismatch, "states live on different spaces");
        }
        write_out(out, a.distance_up_to_phase(b))
    })
}

/// Negativity of the physical reduced state across the cut that puts the
/// physical systems listed in `side_a` (0-based) on one side.
///
/// # Safety
/// `state` must be a live handle, `side_a` must hold `len` values and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_state_negativity(
    state: *const QrfState,
    side_a: *const usize,
    len: usize,
    out: *mut f64,
) -> QrfStatus {
    guard(|| {
        let s = &deref!(state).0;
        if side_a.is_null() && len > 0 {
            return fail(QrfStatus::NullPointer, "null side_a");
        }
        let side = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(side_a, len).to_vec() };
        let rho = match s.physical_density() {
            Ok(r) => r,
            Err(e) => return fail(QrfStatus::InvalidArgument, e.to_string()),
        };
        let value = Bipartition::complement(side, rho.spec().len()).and_then(|cut| entanglement::negativity(&rho, &cut));
        match value {
            Ok(v) => write_out(out, v),
            Err(e) => fail(QrfStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Concurrence of the physical reduced state; requires two physical qubits.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_state_concurrence(state: *const QrfState, out: *mut f64) -> QrfStatus {
    guard(|| {
        let s = &deref!(state).0;
        let value = s
            .physical_density()
            .map_err(|e| e.to_string())
            .and_then(|rho| entanglement::concurrence(&rho).map_err(|e| e.to_string()));
        match value {
            Ok(v) => write_out(out, v),
            Err(e) => fail(QrfStatus::InvalidArgument, e),
        }
    })
}

/// Builds the frame change from frame `from` to frame `to`.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_transform_new(
    config: *const QrfConfig,
    kind: QrfTransformKind,
    from: usize,
    to: usize,
    out: *mut *mut QrfTransform,
) -> QrfStatus {
    guard(|| {
        let cfg = &deref!(config).0;
        let built = match kind {
            QrfTransformKind::Perspectival => qrf::build_perspectival_transform(cfg, from, to),
            QrfTransformKind::Passive => qrf::build_passive_transform(cfg, from, to),
        };
        match built {
            Ok(t) => write_out(out, Box::into_raw(Box::new(QrfTransform(t)))),
            Err(e) => fail(qrf_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `transform` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrf_transform_free(transform: *mut QrfTransform) {
    if !transform.is_null() {
        drop(Box::from_raw(transform));
    }
}

/// Applies the transform and returns a new state. Passive transforms
/// reject states outside their domain with `DomainViolation`.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_transform_apply(
    transform: *const QrfTransform,
    state: *const QrfState,
    out: *mut *mut QrfState,
) -> QrfStatus {
    guard(|| {
        let (t, s) = (&deref!(transform).0, &deref!(state).0);
        match t.apply(s) {
            Ok(next) => write_out(out, Box::into_raw(Box::new(QrfState(next)))),
            Err(e) => fail(qrf_status(&e), e.to_string()),
        }
    })
}

/// Residuals `‖T†T − P_dom‖` and `‖TT† − P_cod‖` (max-abs entries).
///
/// # Safety
/// `transform` must be a live handle and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_transform_isometry_residuals(
    transform: *const QrfTransform,
    domain: *mut f64,
    codomain: *mut f64,
) -> QrfStatus {
    guard(|| {
        let (d, c) = deref!(transform).0.isometry_residuals();
        try_ffi!(match write_out(domain, d) {
            QrfStatus::Ok => Ok(()),
            s => Err(s),
        });
        write_out(codomain, c)
    })
}

unsafe fn finish_report(report: String, passed: bool, out: *mut *mut c_char) -> QrfStatus {
    let status = write_out(out, into_c_string(report));
    if status == QrfStatus::Ok && !passed {
        return fail(QrfStatus::CheckFailed, "a check in the report failed");
    }
    status
}

fn scenario_status(e: &ScenarioError) -> QrfStatus {
    match e {
        ScenarioError::Parse { .. } => QrfStatus::ParseError,
        ScenarioError::CheckFailure { .. } => QrfStatus::CheckFailed,
        ScenarioError::Validation { .. } | ScenarioError::Io { .. } => QrfStatus::InvalidArgument,
    }
}

/// Runs a scenario document, or a builtin scenario when `scenario` is a
/// builtin name, and writes the JSON report to `out_report`. Returns
/// `CheckFailed` (with the report set) when any check fails.
///
/// # Safety
/// `scenario` must be a valid C string and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_run_scenario(scenario: *const c_char, out_report: *mut *mut c_char) -> QrfStatus {
    guard(|| {
        let text = try_ffi!(read_str(scenario));
        let parsed = match scenario::builtin_scenario(text) {
            Some(s) => Ok(s),
            None => scenario::parse_scenario(text),
        };
        let result = parsed.and_then(|s| scenario::run_scenario(&s, &RunOptions::default()));
        match result {
            Ok(report) => finish_report(report.to_json(), report.passed, out_report),
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

/// Runs a verification suite given as a JSON suite spec or a suite name
/// (`"theorem"`, `"oracle"`, ...) and writes the JSON report.
///
/// # Safety
/// `suite` must be a valid C string and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn qrf_run_suite(suite: *const c_char, out_report: *mut *mut c_char) -> QrfStatus {
    guard(|| {
        let text = try_ffi!(read_str(suite));
        let spec = match verify::SuiteKind::parse(text) {
            Some(kind) => SuiteSpec::builtin(kind),
            None => match serde_json::from_str::<SuiteSpec>(text) {
                Ok(s) => s,
                Err(e) => return fail(QrfStatus::ParseError, e.to_string()),
            },
        };
        match verify::run_suite(&spec) {
            Ok(report) => finish_report(report.to_json(), report.passed, out_report),
            Err(e) => fail(QrfStatus::InvalidArgument, e.to_string()),
        }
    })
}
