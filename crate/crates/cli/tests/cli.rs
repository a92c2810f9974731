use std::fs;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::io::Write;

use simplex_reduce::io::{read_complex, read_points};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simplex-reduce"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn run_with_stdin(args: &[&str], dir: &Path, stdin: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn homology_of_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "kite.asc", "ascomplex v1\n0 1 2\n1 4\n2 3\n3 4\n");
    let out = run(&["homology", "--in", "kite.asc", "--k0", "2"], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "beta: 1 1\n");
    let gf2 = run(&["homology", "--in", "kite.asc", "--field", "gf2"], dir.path());
    assert_eq!(String::from_utf8(gf2.stdout).unwrap(), "beta: 1 1\n");
}

#[test]
fn reduce_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "simplex3.asc", "ascomplex v1\n0 1 2 3\n");
    write(dir.path(), "crit.txt", "1 2\n");
    for name in ["a.json", "b.json"] {
        let out = run(
            &["reduce", "--in", "simplex3.asc", "--critical", "crit.txt", "--k0", "2", "--seed", "7", "--report", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["report"]["removed"], 2);
    assert_eq!(report["report"]["bounds"], serde_json::json!([1, 2]));
    assert_eq!(fs::read_to_string(dir.path().join("simplex3.asc")).unwrap(), "ascomplex v1\n0 1 2 3\n");

    let verify = run(&["verify", "--report", "a.json", "--in", "simplex3.asc"], dir.path());
    assert!(verify.status.success());
    let result: serde_json::Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(result["nash"], true);
    assert_eq!(result["audit"]["passed"], true);
}

#[test]
fn generate_then_rips_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let points = run(&["generate", "--process", "poisson", "--lambda", "4", "--d", "2", "--a", "4", "--seed", "1"], dir.path());
    assert!(points.status.success());
    let config = read_points(&points.stdout[..]).unwrap();
    assert_eq!(config.seed, Some(1));
    let rips = run_with_stdin(&["rips", "--epsilon", "1"], dir.path(), &points.stdout);
    assert!(rips.status.success(), "{}", String::from_utf8_lossy(&rips.stderr));
    let complex = read_complex(&rips.stdout[..]).unwrap();
    assert_eq!(complex.num_vertices(), config.len());
    let mut again = Vec::new();
    simplex_reduce::io::write_complex(&mut again, &complex).unwrap();
    assert_eq!(read_complex(&again[..]).unwrap(), complex);
}

#[test]
fn coverage_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(
        &[
            "generate", "--process", "poisson", "--lambda", "4.2", "--a", "2", "--square", "--boundary-step", "0.5",
            "--critical-out", "crit.txt", "--seed", "5", "--out", "pts.txt",
        ],
        dir.path(),
    );
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("crit.txt")).unwrap().lines().count(), 16);
    assert!(run(&["rips", "--epsilon", "1", "--in", "pts.txt", "--out", "c.asc"], dir.path()).status.success());
    let reduce = run(
        &["reduce", "--in", "c.asc", "--critical", "crit.txt", "--k0", "2", "--full-domain", "--report", "r.json", "--out", "small.asc"],
        dir.path(),
    );
    assert!(reduce.status.success());
    let verify = run(&["verify", "--report", "r.json", "--in", "c.asc", "--check", "dominating"], dir.path());
    assert!(verify.status.success());
    let small = read_complex(&fs::read(dir.path().join("small.asc")).unwrap()[..]).unwrap();
    let big = read_complex(&fs::read(dir.path().join("c.asc")).unwrap()[..]).unwrap();
    assert!(small.num_vertices() <= big.num_vertices());
}

#[test]
fn experiments_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "audit.json", r#"{"runs": 5, "seed": 3}"#);
    let out = run(&["experiment", "audit", "--config", "audit.json", "--out", "res", "--threads", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "summary.csv", "plot.svg"] {
        assert!(dir.path().join("res").join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("res/report.json")).unwrap()).unwrap();
    assert_eq!(report["spec"]["runs"], 5);
    assert_eq!(report["failures"], 0);

    write(dir.path(), "regime.json", r#"{"regime": "supercritical", "d": 2, "n_schedule": [50], "theta_rule": {"rule": "power", "exponent": 0.5}, "trials": 4}"#);
    let out = run(&["experiment", "regime", "--config", "regime.json", "--out", "reg"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("reg/samples.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "kite.asc", "ascomplex v1\n0 1 2\n1 4\n2 3\n3 4\n");
    write(dir.path(), "bad.asc", "ascomplex v1\n0 0\n");
    let code = |args: &[&str]| run(args, dir.path()).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["homology", "--bogus"]), Some(1));
    assert_eq!(code(&["homology", "--in", "missing.asc"]), Some(1));
    assert_eq!(code(&["homology", "--in", "bad.asc"]), Some(1));
    assert_eq!(code(&["homology", "--in", "kite.asc", "--field", "gf4"]), Some(1));
    assert_eq!(code(&["--simplex-cap", "5", "homology", "--in", "kite.asc"]), Some(2));
    let out = run(&["homology", "--in", "bad.asc"], dir.path());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
}
