use std::process::{Command, Output};

fn qrflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrflab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn example2_human_report() {
    let out = qrflab(&["run", "example2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("concurrence"));
    assert!(text.contains("PASS"));
}

#[test]
fn example1_machine_report_parses() {
    let out = qrflab(&["run", "example1", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    let report = qrflab::scenario::RunReport::from_json(&stdout(&out)).unwrap();
    assert_eq!(report.schema, qrflab::scenario::REPORT_SCHEMA);
    assert!(report.passed);
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = qrflab(&[
            "verify",
            "monotonicity",
            "--seed",
            "21",
            "--trials",
            "60",
            "--format",
            "machine",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let report = qrflab::verify::VerificationReport::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!((report.spec.seed, report.trials_run), (21, 60));
}

#[test]
fn verify_accepts_suite_files_and_group_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    let spec = qrflab::verify::SuiteSpec { trials: 10, ..qrflab::verify::SuiteSpec::builtin(qrflab::verify::SuiteKind::Oracle) };
    std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    let out = qrflab(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("PASS"));
    let out = qrflab(&["verify", "theorem", "--group", "Z3", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Z3"));
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    assert_eq!(qrflab(&["verify", "theorem", "--group", "Z5x"]).status.code(), Some(2));
    assert_eq!(qrflab(&["run", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(qrflab(&["bogus"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"schema\": ").unwrap();
    let out = qrflab(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let text = qrflab::scenario::BUILTIN_SCENARIOS[0].1.replace("\"Z2\"", "\"Z5x\"");
    std::fs::write(&path, text).unwrap();
    let out = qrflab(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Z5x"));
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fail.json");
    // Expect the wrong concurrence after the transform.
    let text = qrflab::scenario::BUILTIN_SCENARIOS[1].1.replace("\"value\": 1.0", "\"value\": 0.5");
    std::fs::write(&path, text).unwrap();
    let out = qrflab(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn examples_lists_builtins() {
    let out = qrflab(&["examples"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["example1", "example2", "theorem", "corollary", "no_creation", "monotonicity", "mixed", "oracle"] {
        assert!(text.contains(name), "{name}");
    }
}
