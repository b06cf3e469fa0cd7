use std::path::Path;
use std::process::{Command, Output};

fn peca(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peca"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_writes_a_deterministic_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run", "--rule", "30", "--mode", "photonic", "--seed", "5", "--width", "64", "--steps", "40",
        "--boundary", "periodic", "--format", "csv,json,pgm",
    ];
    ok(&peca(&[&args[..], &["--out", "a"]].concat(), dir.path()));
    ok(&peca(&[&args[..], &["--out", "b"]].concat(), dir.path()));
    for f in ["experiment.csv", "experiment.json", "experiment.pgm", "experiment.report.json", "experiment.log"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b").join(f)).unwrap(), "{f} differs");
    }
    let csv = std::fs::read_to_string(dir.path().join("a/experiment.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn spec_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("r90.spec"),
        "name = r90\nmode = photonic\nrule = 90\nwidth = 513\nsteps = 256\nanalyses = fractal\nformats = pgm\n",
    )
    .unwrap();
    ok(&peca(&["run", "r90.spec", "--steps", "128", "--out", "o"], dir.path()));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/r90.report.json")).unwrap()).unwrap();
    assert_eq!(report["steps"], 128);
    assert_eq!(report["rule"], 90);
    assert!(report["analyses"]["fractal"]["dimension"].as_f64().unwrap() > 1.0);
    let pgm = std::fs::read_to_string(dir.path().join("o/r90.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n"));
}

#[test]
fn infeasible_rule_fails_with_census_hint() {
    let dir = tempfile::tempdir().unwrap();
    let out = peca(&["run", "--rule", "255", "--mode", "photonic"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("255") && err.contains("census"), "{err}");
}

#[test]
fn bad_spec_is_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.spec"), "rule = 90\nwidth = wide\n").unwrap();
    let out = peca(&["run", "bad.spec"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert!(!peca(&["run", "--boundary", "sideways", "--rule", "1"], dir.path()).status.success());
}

#[test]
fn compile_and_census() {
    let dir = tempfile::tempdir().unwrap();
    let compiled: serde_json::Value = serde_json::from_str(&ok(&peca(&["compile", "90"], dir.path()))).unwrap();
    assert_eq!(compiled["feasible"], true);
    assert!(compiled["margin"].as_f64().unwrap() > 0.05);
    let csv = ok(&peca(&["census"], dir.path()));
    assert_eq!(csv.lines().count(), 257);
    assert!(csv.lines().any(|l| l.starts_with("255,false")));
}

#[test]
fn convert_round_trips_states() {
    let dir = tempfile::tempdir().unwrap();
    ok(&peca(&["run", "--rule", "110", "--seed", "2", "--width", "50", "--steps", "30", "--format", "json", "--out", "."], dir.path()));
    ok(&peca(&["convert", "experiment.json", "--format", "pgm", "--out", "x.pgm"], dir.path()));
    ok(&peca(&["convert", "x.pgm", "--format", "csv", "--out", "x.csv"], dir.path()));
    ok(&peca(&["run", "--rule", "110", "--seed", "2", "--width", "50", "--steps", "30", "--format", "csv", "--out", "."], dir.path()));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("x.csv")).unwrap(),
        std::fs::read_to_string(dir.path().join("experiment.csv")).unwrap()
    );
}

#[test]
fn analyze_collision_fixture() {
    let dir = tempfile::tempdir().unwrap();
    ok(&peca(&["run", "--rule", "54", "--initial", "fixture:rule54-collision", "--format", "json", "--out", "."], dir.path()));
    let report: serde_json::Value = serde_json::from_str(&ok(&peca(
        &["analyze", "experiment.json", "--analyses", "gliders", "--ether", "rule54-ether"],
        dir.path(),
    )))
    .unwrap();
    let collisions: Vec<_> = report["gliders"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["kind"] == "Collision")
        .collect();
    assert_eq!(collisions.len(), 1);
}

#[test]
fn fixture_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.fixture"), "rule = 90\nboundary = dead\nsteps = 4\nbits = 0001000\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_peca"))
        .args(["fixtures"])
        .env("PECA_FIXTURE_DIR", dir.path())
        .output()
        .unwrap();
    let listing = ok(&out);
    assert!(listing.starts_with("tiny\t"), "{listing}");
}
