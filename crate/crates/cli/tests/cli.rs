use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn ckmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckmax"))
        .args(args)
        .env_remove("CKMAX_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn constants_for_one_two() {
    let out = ckmax(&["constants", "--p", "1", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["command"], "constants");
    let gamma = doc["result"]["gamma"].as_f64().unwrap();
    let classical = doc["result"]["classical"].as_f64().unwrap();
    assert!((gamma - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    assert!((classical - 1.0 / (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
}

#[test]
fn dft_verify_passes_and_is_reproducible() {
    let args = [
        "verify", "--family", "lp", "--p", "1", "--q", "inf", "--n", "8", "--op", "dft", "--seed",
        "7",
    ];
    let a = ckmax(&args);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let doc = json(&a);
    assert_eq!(doc["status"], "pass");
    assert_eq!(doc["result"]["maximal"]["op_norm"]["exact"], true);

    let mut threaded = vec!["--workers", "3"];
    threaded.extend_from_slice(&args);
    let b = ckmax(&threaded);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let report = dir.path().join("report.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"command": "dual-verify", "p": 1, "q": 2, "seed": 4, "trials": 40, "output": {:?}}}"#,
            report.to_str().unwrap()
        ),
    )
    .unwrap();
    let from_file = ckmax(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    assert!(from_file.stdout.is_empty());
    let flags = ckmax(&[
        "dual-verify",
        "--p",
        "1",
        "--q",
        "2",
        "--seed",
        "4",
        "--trials",
        "40",
    ]);
    assert_eq!(fs::read(&report).unwrap(), flags.stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ckmax(&[]).status.code(), Some(1));
    assert_eq!(ckmax(&["verify", "--nope"]).status.code(), Some(1));
    assert_eq!(ckmax(&["constants", "--q", "half"]).status.code(), Some(1));
    // ℓ < 1 is not an estimate constant
    let out = ckmax(&[
        "verify", "--kappa", "1", "--ell", "0.5", "--u", "1", "--trials", "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert_eq!(ckmax(&["--help"]).status.code(), Some(0));
}

#[test]
fn searched_norm_gives_no_verdict() {
    let out = ckmax(&["verify", "--p", "2", "--q", "3", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json(&out);
    assert_eq!(doc["status"], "no_verdict");
    assert_eq!(doc["result"]["maximal"]["violations"], 0);
}

#[test]
fn suite_reports_failures_with_exit_two() {
    // the q → ∞ limit sub-check of criterion 1 is out of reach for p ≥ 2
    let out = ckmax(&["suite", "--seed", "1", "--criteria", "1,4"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out);
    assert_eq!(doc["result"]["failed"], 1);
    assert_eq!(doc["result"]["criteria"][1]["passed"], true);
    assert_eq!(ckmax(&["suite", "--criteria", "11"]).status.code(), Some(1));
}

#[test]
fn norm_and_estimate_on_a_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("space.json");
    fs::write(
        &path,
        r#"{"atoms": [1, 1, 2, 0.5],
            "norm": {"family": "amalgam", "r": 1, "s": "inf", "blocks": [[0, 2], [2, 4]]},
            "vectors": [[1, -2, 0, 3]]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let out = ckmax(&["norm", "--doc", p]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["values"][0], 3.0);

    let out = ckmax(&["estimate", "--doc", p, "--kind", "upper", "--exponent", "2"]);
    let res = &json(&out)["result"];
    assert_eq!(res["exact"], true);
    assert!((res["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(ckmax(&["norm"]).status.code(), Some(1));
}

#[test]
fn fourier_lebesgue_case_passes() {
    let out = ckmax(&[
        "fourier", "--n", "8", "--r", "1", "--s", "1", "--blocks", "2", "--trials", "30",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["result"]["sanity_holds"], true);
    assert_eq!(doc["config"]["offset"], Value::Null);
}
