//! End-to-end checks of the command-line surface: exit codes, schemas, and
//! output determinism.

use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mdl")
}

fn instance_path(name: &str) -> String {
    format!(
        "{}/../../instances/{name}.json",
        env!("CARGO_MANIFEST_DIR")
    )
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn mdl")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn analyze_reports_the_gap_profile() {
    let out = run(&["analyze", "--instance", &instance_path("two_by_two")]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["schema_version"], 1);
    let dmin = doc["result"]["gap_profile"]["delta_dr_min"].as_f64().unwrap();
    assert!((dmin - 0.02).abs() < 1e-12, "delta_dr_min {dmin}");
    let lip = doc["result"]["lipschitz"]["overall"].as_f64().unwrap();
    assert!((lip - 0.8).abs() < 1e-12);
}

#[test]
fn analyze_csv_is_flat_key_value_rows() {
    let out = run(&[
        "analyze",
        "--instance",
        &instance_path("two_by_two"),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l.starts_with("gap_profile.delta_dr_min,")));
}

#[test]
fn analyze_rejects_invalid_probabilities_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"actions":["a1","a2"],"support":[0.0,1.0],
            "distributions":[{"name":"Q1","probs":[0.5,0.4]},{"name":"Q2","probs":[0.4,0.6]}],
            "reward":[[0.2,0.8],[0.1,0.9]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("distributions[0].probs"), "{err}");
}

#[test]
fn analyze_rejects_malformed_json_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = run(&["analyze", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_is_byte_deterministic() {
    let args = [
        "run",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "ue",
        "--n",
        "5",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc = stdout_json(&a);
    assert_eq!(doc["result"]["run"]["total_samples"], 10);
}

#[test]
fn run_lcb_dr_reports_rounds() {
    let out = run(&[
        "run",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "lcb-dr",
        "--permutation",
        "a1,a2",
        "--eps",
        "auto",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let rounds = doc["result"]["run"]["rounds"].as_array().unwrap();
    assert_eq!(rounds.len(), 2);
    assert!(rounds[0]["t_budget"].is_u64());
}

#[test]
fn run_lcb_dr_rejects_eps_below_the_bound_naming_the_round() {
    let out = run(&[
        "run",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "lcb-dr",
        "--permutation",
        "a1,a2",
        "--eps",
        "0.01,0.01",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("round 2"), "{err}");
}

#[test]
fn nue_allocation_length_mismatch_is_exit_2() {
    let out = run(&[
        "run",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "nue",
        "--allocation",
        "3,1,2",
        "--seed",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mc_emits_the_exact_header_and_is_deterministic() {
    let args = [
        "mc",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "ue",
        "--n-list",
        "2,4",
        "--trials",
        "500",
        "--seed",
        "11",
    ];
    let a = run(&args);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,n,T,regret_mean,regret_se,errprob_mean,errprob_se,bound_value,bound_applicable,seed"
    );
    assert_eq!(lines.count(), 2);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn mc_accepts_the_minimum_trial_count() {
    let out = run(&[
        "mc",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "ue",
        "--n-list",
        "2",
        "--trials",
        "2",
        "--seed",
        "1",
    ]);
    assert!(out.status.success(), "{out:?}");
}

#[test]
fn mc_errprob_trend_is_nonincreasing_on_the_wide_gap_instance() {
    let out = run(&[
        "mc",
        "--instance",
        &instance_path("wide_gap"),
        "--algorithm",
        "ue",
        "--n-list",
        "500,1000,2000",
        "--trials",
        "20000",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let mut prev_mean = f64::INFINITY;
    let mut prev_se = 0.0;
    for row in rows {
        let mean: f64 = row[5].parse().unwrap();
        let se: f64 = row[6].parse().unwrap();
        assert!(
            mean <= prev_mean + 3.0 * (se + prev_se),
            "errprob not decreasing within noise: {mean} after {prev_mean}"
        );
        prev_mean = mean;
        prev_se = se;
    }
}

#[test]
fn mc_sweeps_cover_nue_and_lcb_dr() {
    let out = run(&[
        "mc",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "nue",
        "--allocation-list",
        "5,10;10,20",
        "--trials",
        "200",
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("nue,5,15,"));

    let out = run(&[
        "mc",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "lcb-dr",
        "--eps-scale-list",
        "400",
        "--permutation",
        "a1,a2",
        "--trials",
        "50",
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "lcb-dr");
    let avg_t: f64 = row[2].parse().unwrap();
    assert!(avg_t > 100.0, "realized budget {avg_t}");
}

#[test]
fn bounds_csv_is_flat() {
    let out = run(&[
        "bounds",
        "--instance",
        &instance_path("two_by_two"),
        "--which",
        "ue",
        "--n",
        "200000",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l.starts_with("bounds.ue.value,")));
}

#[test]
fn bounds_command_evaluates_the_requested_reports() {
    let out = run(&[
        "bounds",
        "--instance",
        &instance_path("two_by_two"),
        "--which",
        "ue,ue-free,nue,lcb-dr,emp-max",
        "--n",
        "200000",
        "--allocation",
        "10,20",
        "--permutation",
        "a1,a2",
        "--eps",
        "auto",
        "--method",
        "exact",
    ]);
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    let bounds = &doc["result"]["bounds"];
    assert!(bounds["ue"]["applicable"].as_bool().unwrap());
    assert!(!bounds["nue"]["bound"]["applicable"].as_bool().unwrap());
    let sigma2 = bounds["nue"]["variance_quantities"]["sigma2_t"].as_f64().unwrap();
    assert!((sigma2 - 0.024).abs() < 1e-12);
    assert!(bounds["lcb-dr"]["bound"]["vacuous"].as_bool().unwrap());
    assert!(bounds["emp-max"]["hoeffding"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_default_battery_passes_with_reduced_trials() {
    let out = run(&["verify", "--trials", "20000", "--seed", "1"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(text.contains("oracle-vs-mc-single-sample"));
    assert!(text.lines().filter(|l| l.starts_with("ok")).count() >= 10);
}

#[test]
fn verify_warns_below_a_thousand_trials() {
    let out = run(&["verify", "--trials", "10", "--seed", "1"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unreliable below 1000 trials"), "{err}");
}

#[test]
fn verify_refuses_cap_exceeding_oracle_requests_with_exit_2() {
    let out = run(&[
        "verify",
        "--instance",
        &instance_path("two_by_two"),
        "--n",
        "40",
        "--trials",
        "2000",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("oracle refused"), "{err}");
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "run",
        "--instance",
        &instance_path("two_by_two"),
        "--algorithm",
        "ue",
        "--n",
        "3",
        "--seed",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["schema_version"], 1);
}
