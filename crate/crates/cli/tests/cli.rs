use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hic")).args(args).env_remove("HIC_SEED").output().unwrap()
}

fn in_dir(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hic")).args(args).current_dir(dir).env_remove("HIC_SEED").output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn config_run_reconstructs_the_ideal_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = in_dir(
        dir.path(),
        &["run", "--circuit", "builtin:qaoa12_mirrored", "--calibration", "builtin:line9_islands", "--dry-run"],
    );
    // 12 qubits never fit on 4-qubit islands within the default budget.
    assert_eq!(out.status.code(), Some(3));

    let cfg = dir.path().join("spec.toml");
    std::fs::write(
        &cfg,
        r#"
calibration = "builtin:line9_islands"
z_v = 2.0
z_e = 2.0
k_max = 8
backend = "exact"
output = "ising"

[circuit]
generator = "ising"
n = 6
steps = 2
theta_zz = 0.3
theta_x = 0.2
"#,
    )
    .unwrap();
    let out = in_dir(dir.path(), &["run", "--config", "spec.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("ising/report.json"));
    assert_eq!(r["schema"], "hic-run-report/1");
    let w = &r["selection"]["winner"];
    assert_eq!(w["d"], 4);
    assert_eq!(w["overhead"]["canonical_executions"], 1296);
    let exec = &r["winner_execution"]["result"]["expectation"];
    let ideal = r["ideal_expectation"].as_f64().unwrap();
    assert!((exec.as_f64().unwrap() - ideal).abs() < 1e-9);
    for f in ["timing.json", "candidates.csv", "comparison.csv"] {
        assert!(dir.path().join("ising").join(f).exists(), "{f}");
    }
}

#[test]
fn budget_of_one_exits_with_no_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out = in_dir(
        dir.path(),
        &[
            "run",
            "--circuit",
            "builtin:qaoa12_mirrored",
            "--calibration",
            "builtin:heavy_hex_islands",
            "--z-v",
            "1",
            "--z-e",
            "3",
            "--k-max",
            "1",
            "--out",
            "r",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let r = json(&dir.path().join("r/report.json"));
    assert!(r["selection"]["winner"].is_null());
    assert!(r["winner_execution"].is_null());
}

#[test]
fn dry_run_skips_execution_and_reruns_match() {
    let dir = tempfile::tempdir().unwrap();
    let args = |jobs: &'static str| {
        [
            "--jobs",
            jobs,
            "run",
            "--circuit",
            "builtin:qaoa12_mirrored",
            "--calibration",
            "builtin:heavy_hex_islands",
            "--z-v",
            "1",
            "--z-e",
            "3",
            "--out",
            "r",
            "--dry-run",
        ]
    };
    assert!(in_dir(dir.path(), &args("1")).status.success());
    let first = std::fs::read(dir.path().join("r/report.json")).unwrap();
    let r: Value = serde_json::from_slice(&first).unwrap();
    assert!(r["winner_execution"].is_null());
    assert_eq!(r["comparison"]["winner_executions"], 256);
    assert_eq!(r["comparison"]["baseline_executions"], 6561);
    assert!(in_dir(dir.path(), &args("4")).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("r/report.json")).unwrap());
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(hic(&["find", "--circuit", "/no/such/file.qasm", "--d", "3"]).status.code(), Some(2));
    assert_eq!(
        hic(&["select", "--circuit", "builtin:nope", "--calibration", "builtin:falcon27"]).status.code(),
        Some(2)
    );
    assert_eq!(hic(&["puncture", "--calibration", "builtin:falcon27", "--z-v", "-1"]).status.code(), Some(2));
    assert_eq!(hic(&["bogus"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "kmax = 3\n").unwrap();
    assert_eq!(in_dir(dir.path(), &["run", "--config", "bad.toml"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.qasm"), "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n").unwrap();
    assert_eq!(in_dir(dir.path(), &["find", "--circuit", "bad.qasm", "--d", "1"]).status.code(), Some(2));
}

#[test]
fn generators_round_trip_through_find_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(in_dir(p, &["gen-circuit", "ising", "--n", "6", "-o", "c.qasm"]).status.success());
    assert!(in_dir(p, &["gen-calibration", "--topology", "heavy-hex:1", "--seed", "3", "-o", "cal.json"])
        .status
        .success());

    let out = in_dir(p, &["find", "--circuit", "c.qasm", "--d", "3", "-o", "s.json"]);
    assert!(out.status.success());
    let s = json(&p.join("s.json"));
    assert_eq!(s["num_gate_cuts"], 4);

    let out = in_dir(p, &["score", "--calibration", "cal.json", "--strategy", "s.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let ws = r["w_s"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&ws));

    let out = in_dir(p, &["score", "--calibration", "cal.json", "--circuit", "c.qasm"]);
    assert!(out.status.success());

    let out = in_dir(p, &["puncture", "--calibration", "cal.json"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["candidate_constraints"].is_array());
}

#[test]
fn seed_env_changes_default_generation() {
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_hic"));
        c.args(["gen-circuit", "clifford", "--n", "5"]);
        match seed {
            Some(s) => c.env("HIC_SEED", s),
            None => c.env_remove("HIC_SEED"),
        };
        c.output().unwrap().stdout
    };
    assert_eq!(run(None), run(Some("0")));
    assert_ne!(run(None), run(Some("17")));
    assert_eq!(run(Some("17")), run(Some("17")));
}

#[test]
fn reproduce_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["table1", "table4_arith"] {
        let out = in_dir(dir.path(), &["reproduce", name, "--out", "rep"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with("PASS"), "{text}");
        let summary = std::fs::read_to_string(dir.path().join("rep/summary.csv")).unwrap();
        assert!(summary.starts_with("experiment,status,seconds,detail"));
    }
    let rows = std::fs::read_to_string(dir.path().join("rep/table1/table1.csv")).unwrap();
    assert!(rows.contains("3,4,0,6561,6561"));
}
