//! End-to-end tests of the rothlab binary: exit codes, file formats, and
//! determinism contracts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rothlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_set(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn gen_greedy_matches_expected_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let result = run(&["gen", "--kind", "greedy", "--n", "13", "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let body = std::fs::read_to_string(&out).unwrap();
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(value["n"], 13);
    assert_eq!(value["elements"], serde_json::json!([0, 1, 3, 4, 9, 10, 12]));
}

#[test]
fn gen_random_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let result = run(&[
            "gen", "--kind", "random", "--n", "100", "--alpha", "0.5", "--seed", "7", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_bad_arguments() {
    let result = run(&["gen", "--kind", "behrend", "--n", "0"]);
    assert_eq!(result.status.code(), Some(2));
    let result = run(&["gen", "--kind", "unknown", "--n", "10"]);
    assert_eq!(result.status.code(), Some(2));
    let result = run(&["gen", "--kind", "random", "--n", "10"]); // missing --alpha
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn check_reports_witness_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let with_ap = write_set(dir.path(), "ap.json", r#"{"n":5,"elements":[0,2,4]}"#);
    let result = run(&["check", with_ap.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(stdout(&result).contains("(0, 2, 4)"));

    let free = write_set(dir.path(), "free.json", r#"{"n":5,"elements":[0,1,3,4]}"#);
    let result = run(&["check", free.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));
    assert!(stdout(&result).contains("3AP-free"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_set(dir.path(), "bad.json", "not json at all");
    for cmd in ["check", "verify", "analyze", "increment", "iterate"] {
        let result = run(&[cmd, bad.to_str().unwrap()]);
        assert_eq!(result.status.code(), Some(2), "{cmd} on malformed input");
    }
    let unsorted = write_set(dir.path(), "unsorted.json", r#"{"n":5,"elements":[4,1]}"#);
    let result = run(&["check", unsorted.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    let result = run(&["check", missing.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn verify_passes_on_generated_set() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("g.json");
    assert!(run(&["gen", "--kind", "greedy", "--n", "243", "--out", set.to_str().unwrap()])
        .status
        .success());
    let result = run(&["verify", set.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));
    assert!(stdout(&result).contains("ALL CHECKS HOLD"));

    let json = run(&["verify", set.to_str().unwrap(), "--json"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(report["all_hold"], true);
    assert_eq!(report["density"], "32/243");
}

#[test]
fn analyze_dumps_profiles_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let set = write_set(dir.path(), "s.json", r#"{"n":5,"elements":[0,1,3,4]}"#);
    let r_csv = dir.path().join("r.csv");
    let v_csv = dir.path().join("v.csv");
    let result = run(&[
        "analyze",
        set.to_str().unwrap(),
        "--ell",
        "2",
        "--dump-r",
        r_csv.to_str().unwrap(),
        "--dump-v",
        v_csv.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let text = stdout(&result);
    assert!(text.contains("E_scaled = 580"));
    assert!(text.contains("m        = 23"));

    let r = std::fs::read_to_string(&r_csv).unwrap();
    let mut lines = r.lines();
    assert_eq!(lines.next().unwrap(), "t,R_scaled");
    assert_eq!(lines.next().unwrap(), "0,20");
    assert_eq!(lines.next().unwrap(), "1,-6");
    assert_eq!(r.lines().count(), 24); // header + one row per residue

    let v = std::fs::read_to_string(&v_csv).unwrap();
    let mut lines = v.lines();
    assert_eq!(lines.next().unwrap(), "d,V_scaled");
    assert_eq!(lines.next().unwrap(), "0,80"); // ℓ²·R̃(0)
    assert_eq!(lines.next().unwrap(), "1,28");
}

#[test]
fn analyze_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("g.json");
    assert!(run(&["gen", "--kind", "greedy", "--n", "500", "--out", set.to_str().unwrap()])
        .status
        .success());
    let mut dumps = Vec::new();
    for threads in ["1", "2"] {
        let csv = dir.path().join(format!("r{threads}.csv"));
        let result = run(&[
            "analyze",
            set.to_str().unwrap(),
            "--threads",
            threads,
            "--dump-r",
            csv.to_str().unwrap(),
        ]);
        assert!(result.status.success());
        dumps.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(dumps[0], dumps[1], "profiles must not depend on thread count");
}

#[test]
fn env_var_caps_threads() {
    let dir = tempfile::tempdir().unwrap();
    let set = write_set(dir.path(), "s.json", r#"{"n":5,"elements":[0,1,3,4]}"#);
    let result = bin()
        .args(["analyze", set.to_str().unwrap()])
        .env("ROTHLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(result.status.success());
}

#[test]
fn increment_writes_result_json() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("g.json");
    assert!(run(&["gen", "--kind", "greedy", "--n", "243", "--out", set.to_str().unwrap()])
        .status
        .success());
    let out = dir.path().join("inc.json");
    let result = run(&[
        "increment",
        set.to_str().unwrap(),
        "--mode",
        "greedy",
        "--out",
        out.to_str().unwrap(),
        "--json",
    ]);
    assert!(result.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&result)).unwrap();
    for key in ["d", "x", "ell", "q", "s", "block", "P", "eta", "new_density", "mode", "certificates"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["mode"], "greedy");
    let file_value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(value, file_value);
}

#[test]
fn increment_reports_clean_failures() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_set(dir.path(), "full.json", r#"{"n":5,"elements":[0,1,2,3,4]}"#);
    let result = run(&["increment", full.to_str().unwrap(), "--json"]);
    assert!(result.status.success());
    assert!(stdout(&result).contains("zero_energy"));
}

#[test]
fn iterate_emits_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("g.json");
    assert!(run(&["gen", "--kind", "greedy", "--n", "243", "--out", set.to_str().unwrap()])
        .status
        .success());
    let csv = dir.path().join("t.csv");
    let result = run(&["iterate", set.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(result.status.success());
    let body = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        body.lines().next().unwrap(),
        "j,N_j,alpha_num,alpha_den,eta_num,eta_den,P_len,stop_reason"
    );
    assert!(body.lines().count() >= 2);
}

#[test]
fn r3_witness_passes_check() {
    let result = run(&["r3", "--n", "9", "--json"]);
    assert!(result.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&result)).unwrap();
    assert_eq!(value["r3"], 5);

    let dir = tempfile::tempdir().unwrap();
    let witness = write_set(
        dir.path(),
        "w.json",
        &format!("{{\"n\":9,\"elements\":{}}}", value["witness"]),
    );
    assert_eq!(run(&["check", witness.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn r3_budget_exceeded_exits_5() {
    let result = run(&["r3", "--n", "50"]);
    assert_eq!(result.status.code(), Some(5));
}

#[test]
fn capacity_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let set = write_set(dir.path(), "huge.json", r#"{"n":100001,"elements":[0,1]}"#);
    let result = run(&["analyze", set.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(4));
}

#[test]
fn bench_prints_csv_with_header() {
    let result = run(&["bench", "--n", "100", "--reps", "2"]);
    assert!(result.status.success());
    let body = stdout(&result);
    assert_eq!(body.lines().next().unwrap(), "kernel,n,m,ell,rep,millis");
    assert_eq!(body.lines().filter(|l| l.starts_with("autocorrelation")).count(), 2);
    assert_eq!(body.lines().filter(|l| l.starts_with("v_profile")).count(), 2);
}

#[test]
fn bound_report_prints_table() {
    let result = run(&["bound", "--n", "1000000", "--alpha", "1.0"]);
    assert!(result.status.success());
    assert!(stdout(&result).contains("exceeds bound"));
    let result = run(&["bound", "--n", "15", "--alpha", "0.5"]);
    assert_eq!(result.status.code(), Some(2));
}
