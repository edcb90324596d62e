use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wallfan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wallfan")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn fixture() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/oda75_gamma_h.json").display().to_string()
}

#[test]
fn validate_builtin() {
    let out = wallfan(&["validate", "builtin:oda75"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("smooth true"));
}

#[test]
fn validate_rejects_incomplete_fan() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half.json");
    fs::write(&path, r#"{"schema":"fan/1","dim":2,"rays":[[1,0],[0,1],[-1,-1]],"cones":[[0,1]]}"#).unwrap();
    let out = wallfan(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("complete false"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"schema":"fan/1","dim":3,"rays":[[2,4,6]],"cones":[]}"#).unwrap();
    assert_eq!(wallfan(&["validate", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(wallfan(&["fvector", "builtin:nope"]).status.code(), Some(2));
    assert_eq!(wallfan(&["certify", "builtin:p2", "--method", "simplex"]).status.code(), Some(2));
}

#[test]
fn normals_in_order() {
    let out = wallfan(&["normals", "builtin:oda75"]);
    let lines: Vec<String> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], "(0,0,1)");
    assert_eq!(lines[8], "(1,1,-1)");
}

#[test]
fn projectivize_oda_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = wallfan(&["projectivize", "builtin:oda75", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout(&out);
    assert!(summary.contains("total 25"));
    assert!(summary.contains("(32,90,60)"));
    assert!(fs::read_to_string(out_dir.join("counts.tsv")).unwrap().ends_with("total\t25\n"));

    let fan = out_dir.join("fan.json");
    let fan = fan.to_str().unwrap();
    assert_eq!(wallfan(&["validate", fan]).status.code(), Some(0));
    assert_eq!(stdout(&wallfan(&["fvector", fan])).trim(), "(32,90,60)");
    assert_eq!(wallfan(&["certify", fan, "--method", "lp"]).status.code(), Some(0));

    let bends = wallfan(&["bends", fan, &fixture()]);
    assert_eq!(bends.status.code(), Some(0));
    assert!(stdout(&bends).contains("\"min_bend\": \"1/2\""));

    let log = out_dir.join("log.json");
    let cert = dir.path().join("cert.json");
    let sandwich = wallfan(&[
        "certify",
        fan,
        "--method",
        "sandwich",
        "--sigma",
        "builtin:oda75",
        "--log",
        log.to_str().unwrap(),
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(sandwich.status.code(), Some(0));
    assert!(fs::read_to_string(cert).unwrap().contains("\"kind\": \"ample\""));
}

#[test]
fn certify_oda_is_farkas() {
    let out = wallfan(&["certify", "--method", "lp", "builtin:oda75"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("\"kind\": \"farkas\""));
}

#[test]
fn sandwich_without_log_is_input_error() {
    assert_eq!(wallfan(&["certify", "builtin:p2", "--method", "sandwich"]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(wallfan(&["projectivize", "builtin:oda75", "--out", d.to_str().unwrap()]).status.success());
    }
    for file in ["fan.json", "log.json", "counts.tsv", "summary.txt"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn permuted_basis_run() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("swap.json");
    fs::write(&basis, "[[0,0,1],[0,1,0],[1,0,0]]").unwrap();
    let out_dir = dir.path().join("run");
    let out = wallfan(&[
        "projectivize",
        "builtin:oda75",
        "--basis",
        basis.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let fan = out_dir.join("fan.json");
    assert_eq!(wallfan(&["validate", fan.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(wallfan(&["certify", fan.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn non_unimodular_basis_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("double.json");
    fs::write(&basis, "[[2,0,0],[0,1,0],[0,0,1]]").unwrap();
    let out = wallfan(&["projectivize", "builtin:oda75", "--basis", basis.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn builtin_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.json");
    assert!(wallfan(&["builtin", "p3", "--out", path.to_str().unwrap()]).status.success());
    assert_eq!(stdout(&wallfan(&["fvector", path.to_str().unwrap()])).trim(), "(4,6,4)");
    assert_eq!(stdout(&wallfan(&["builtin", "p3"])), fs::read_to_string(&path).unwrap());
}

#[test]
fn early_stop_on_p2() {
    let out = wallfan(&["projectivize", "builtin:p2", "--early-stop", "--tracker", "checked"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("stopped early"));
}
