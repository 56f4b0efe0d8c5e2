use std::path::Path;
use std::process::{Command, Output};

fn gcsieve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcsieve"))
        .args(args)
        .env_remove("GCSPS_OUT_DIR")
        .env_remove("GCSPS_THREADS")
        .output()
        .expect("binary runs")
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(gcsieve(&["--help"]).status.code(), Some(0));
    assert_eq!(gcsieve(&["--version"]).status.code(), Some(0));
    assert_eq!(gcsieve(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let o = gcsieve(&["scenario", "qome", "--config", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("absent.json"), "{}", stderr(&o));
}

#[test]
fn malformed_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ \"scenario\": \"qome\", \"seed\": }").unwrap();
    let o = gcsieve(&["scenario", "qome", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.json"));
    // Scenario on the command line must match the file.
    let o = gcsieve(&[
        "scenario",
        "qome",
        "--config",
        configs().join("theorem3.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn passing_scenario_writes_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = gcsieve(&[
        "scenario",
        "theorem3",
        "--config",
        configs().join("theorem3.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["verdict"], "PASS");
    assert_eq!(verdict["scenario"], "theorem3");
    assert!(dir.path().join("minimizers.csv").exists());
}

#[test]
fn wrong_expectation_fails_the_verdict() {
    // At zero temperature the rate is not proportional to the uncertainty.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qome_wrong.json");
    std::fs::write(
        &cfg,
        r#"{
  "scenario": "qome", "seed": 5, "gamma1": 1.0, "balance": 1.0,
  "sweep": [ { "nbar": 0.0, "expect_proportional": true } ],
  "n_random": 50, "n_starts": 8,
  "trajectory": { "nbar": 100.0, "t_max": 0.01, "steps": 10, "n_initial": 1 },
  "thresholds": { "ratio_spread": 0.01, "value_slack": 1e-8, "ground_infidelity": 1e-6,
                  "gcs_infidelity": 1e-6, "final_purity": 1e-6, "monotone": 1e-12 }
}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = gcsieve(&["scenario", "qome", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("verdict.json")).unwrap();
    assert!(text.contains("\"FAIL\""));
}

#[test]
fn uncertainty_sweep_reports_the_bound() {
    let o = gcsieve(&["uncertainty", "--rep", "spin:3/2", "--random", "500", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("1.5"), "{stdout}");
    assert_eq!(gcsieve(&["uncertainty", "--rep", "spin:x"]).status.code(), Some(1));
}

#[test]
fn sieve_evolve_and_dfs_from_model_files() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(&model, r#"{ "id": "dephased", "rep": "spin:1/2", "hamiltonian": "jz", "lindblads": ["sqrt(0.5)*jz"] }"#)
        .unwrap();
    let out = dir.path().join("sieve");
    let o = gcsieve(&["sieve", "--model", model.to_str().unwrap(), "--starts", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sieve_report.json")).unwrap()).unwrap();
    assert!(report["global_min_value"].as_f64().unwrap().abs() < 1e-8);

    let state = dir.path().join("state.json");
    std::fs::write(&state, r#"{ "amplitudes": [[0.6, 0.0], [0.0, 0.8]] }"#).unwrap();
    let out = dir.path().join("evolve");
    let o = gcsieve(&[
        "evolve",
        "--model",
        model.to_str().unwrap(),
        "--state",
        state.to_str().unwrap(),
        "--tmax",
        "2",
        "--steps",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("purity_trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);

    let collective = dir.path().join("collective.json");
    std::fs::write(&collective, r#"{ "rep": "collective:2", "lindblads": ["jx", "jy", "jz"] }"#).unwrap();
    let o = gcsieve(&["dfs", "--model", collective.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dfs_dim"], 1);

    std::fs::write(&model, r#"{ "rep": "spin:1/2", "lindblads": ["jq"] }"#).unwrap();
    let o = gcsieve(&["sieve", "--model", model.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("jq"));
}
