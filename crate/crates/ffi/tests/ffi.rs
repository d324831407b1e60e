use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qrflab_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qrf_last_error()) }.to_string_lossy().into_owned()
}

fn four_qubit_config() -> *mut QrfConfig {
    let mut group = ptr::null_mut();
    let mut config = ptr::null_mut();
    unsafe {
        assert_eq!(qrf_group_new_named(cstr("Z2").as_ptr(), &mut group), QrfStatus::Ok);
        let phys = cstr(r#"["regular", "regular"]"#);
        assert_eq!(qrf_config_new(group, 2, phys.as_ptr(), &mut config), QrfStatus::Ok);
        qrf_group_free(group);
    }
    config
}

fn basis_state(config: *const QrfConfig, terms: &[(usize, f64, f64)]) -> *mut QrfState {
    let mut amps = vec![0.0; 32];
    for &(i, re, im) in terms {
        amps[2 * i] = re;
        amps[2 * i + 1] = im;
    }
    let mut state = ptr::null_mut();
    assert_eq!(unsafe { qrf_state_new(config, amps.as_ptr(), 16, true, &mut state) }, QrfStatus::Ok);
    state
}

#[test]
fn group_queries() {
    let mut g = ptr::null_mut();
    let (mut order, mut prod, mut inv) = (0, 0, 0);
    unsafe {
        assert_eq!(qrf_group_new_named(cstr("Z3").as_ptr(), &mut g), QrfStatus::Ok);
        assert_eq!(qrf_group_order(g, &mut order), QrfStatus::Ok);
        assert_eq!(qrf_group_mul(g, 2, 2, &mut prod), QrfStatus::Ok);
        assert_eq!(qrf_group_inverse(g, 1, &mut inv), QrfStatus::Ok);
        assert_eq!(qrf_group_mul(g, 3, 0, &mut prod), QrfStatus::InvalidArgument);
        qrf_group_free(g);
    }
    assert_eq!((order, inv), (3, 2));
}

#[test]
fn table_groups_are_validated() {
    let z2 = [0usize, 1, 1, 0];
    let broken = [0usize, 1, 1, 1];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(qrf_group_new_table(z2.as_ptr(), 2, &mut g), QrfStatus::Ok);
        qrf_group_free(g);
        assert_eq!(qrf_group_new_table(broken.as_ptr(), 2, &mut g), QrfStatus::InvalidArgument);
    }
    assert!(!last_error().is_empty());
}

#[test]
fn null_and_bad_arguments_report_errors() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(qrf_group_new_named(ptr::null(), &mut g), QrfStatus::NullPointer);
        assert_eq!(qrf_group_new_named(cstr("Q7").as_ptr(), &mut g), QrfStatus::InvalidArgument);
        assert!(last_error().contains("Q7"));
        let mut order = 0;
        assert_eq!(qrf_group_order(ptr::null(), &mut order), QrfStatus::NullPointer);
        let bad = cstr("[\"regular\"");
        assert_eq!(qrf_group_new_named(cstr("Z2").as_ptr(), &mut g), QrfStatus::Ok);
        let mut c = ptr::null_mut();
        assert_eq!(qrf_config_new(g, 2, bad.as_ptr(), &mut c), QrfStatus::ParseError);
        qrf_group_free(g);
        qrf_group_free(ptr::null_mut());
        qrf_string_free(ptr::null_mut());
    }
}

#[test]
fn entangling_frame_change_matches_expected_amplitudes() {
    let cfg = four_qubit_config();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // |0⟩_1 |+⟩_2 |00⟩ in positional order (1, 2, A, B)
    let psi = basis_state(cfg, &[(0b0000, h, 0.0), (0b0100, h, 0.0)]);
    // |0⟩_2 and GHZ on (1, A, B)
    let expected = basis_state(cfg, &[(0b0000, h, 0.0), (0b1011, h, 0.0)]);
    let mut t = ptr::null_mut();
    let mut out = ptr::null_mut();
    let (mut dist, mut neg, mut conc) = (1.0, 1.0, 1.0);
    let mut amps = vec![0.0; 32];
    unsafe {
        assert_eq!(qrf_transform_new(cfg, QrfTransformKind::Perspectival, 1, 2, &mut t), QrfStatus::Ok);
        assert_eq!(qrf_transform_apply(t, psi, &mut out), QrfStatus::Ok);
        assert_eq!(qrf_state_distance(out, expected, &mut dist), QrfStatus::Ok);
        assert_eq!(qrf_state_negativity(out, [0usize].as_ptr(), 1, &mut neg), QrfStatus::Ok);
        assert_eq!(qrf_state_concurrence(out, &mut conc), QrfStatus::Ok);
        assert_eq!(qrf_state_amplitudes(out, amps.as_mut_ptr(), 31), QrfStatus::DimensionMismatch);
        assert_eq!(qrf_state_amplitudes(out, amps.as_mut_ptr(), amps.len()), QrfStatus::Ok);
        for s in [psi, expected, out] {
            qrf_state_free(s);
        }
        qrf_transform_free(t);
        qrf_config_free(cfg);
    }
    assert!(dist <= 1e-12, "{dist}");
    assert!(neg.abs() <= 1e-12 && conc.abs() <= 1e-9);
    let norm: f64 = amps.iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() <= 1e-12);
}

#[test]
fn passive_transform_rejects_states_off_its_domain() {
    let cfg = four_qubit_config();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // frame 1 in |+⟩ lies outside the g_1 = e domain
    let psi = basis_state(cfg, &[(0b0000, h, 0.0), (0b1000, h, 0.0)]);
    let mut t = ptr::null_mut();
    let mut out = ptr::null_mut();
    let (mut d, mut c) = (1.0, 1.0);
    unsafe {
        assert_eq!(qrf_transform_new(cfg, QrfTransformKind::Passive, 1, 2, &mut t), QrfStatus::Ok);
        assert_eq!(qrf_transform_isometry_residuals(t, &mut d, &mut c), QrfStatus::Ok);
        assert_eq!(qrf_transform_apply(t, psi, &mut out), QrfStatus::DomainViolation);
        assert!(out.is_null());
        assert_eq!(qrf_transform_new(cfg, QrfTransformKind::Passive, 1, 3, &mut t), QrfStatus::InvalidArgument);
        qrf_state_free(psi);
        qrf_config_free(cfg);
    }
    assert!(d <= 1e-12 && c <= 1e-12);
}

#[test]
fn state_dimension_is_checked() {
    let cfg = four_qubit_config();
    let amps = [1.0, 0.0, 0.0, 0.0];
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(qrf_state_new(cfg, amps.as_ptr(), 2, false, &mut s), QrfStatus::DimensionMismatch);
        qrf_config_free(cfg);
    }
}

fn take_report(p: *mut std::ffi::c_char) -> serde_json::Value {
    assert!(!p.is_null());
    let text = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { qrf_string_free(p) };
    serde_json::from_str(&text).unwrap()
}

#[test]
fn builtin_scenario_and_suite_reports() {
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { qrf_run_scenario(cstr("example2").as_ptr(), &mut report) }, QrfStatus::Ok);
    assert_eq!(take_report(report)["passed"], true);
    let spec = cstr(r#"{"suite": "oracle", "group": "Z2", "frames": 2, "physical": ["regular"], "trials": 5, "seed": 3}"#);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { qrf_run_suite(spec.as_ptr(), &mut report) }, QrfStatus::Ok, "{}", last_error());
    assert_eq!(take_report(report)["trials_run"], 5);
}

#[test]
fn failing_scenario_still_returns_its_report() {
    let name = qrflab::scenario::BUILTIN_SCENARIOS[1].1.replace("\"value\": 1.0", "\"value\": 0.5");
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { qrf_run_scenario(cstr(&name).as_ptr(), &mut report) }, QrfStatus::CheckFailed);
    assert_eq!(take_report(report)["passed"], false);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { qrf_run_scenario(cstr("{").as_ptr(), &mut report) }, QrfStatus::ParseError);
    assert!(report.is_null());
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib_dir = target_dir();
    if !lib_dir.join("libqrflab_ffi.so").exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or shared library");
        return;
    }
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "qrflab.h"
int main(void) {
    QrfGroup *g = NULL;
    size_t order = 0;
    if (qrf_group_new_named("S3", &g) != QRF_STATUS_OK) return 1;
    if (qrf_group_order(g, &order) != QRF_STATUS_OK || order != 6) return 2;
    qrf_group_free(g);
    char *report = NULL;
    if (qrf_run_scenario("example1", &report) != QRF_STATUS_OK) return 3;
    qrf_string_free(report);
    if (qrf_group_new_named("nope", &g) != QRF_STATUS_INVALID_ARGUMENT) return 4;
    printf("%s\n", qrf_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = work.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lqrflab_ffi")
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
