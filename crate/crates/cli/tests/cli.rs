use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixsing"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn morse_report() {
    let v = json(&["invariants", "p^2+x1^2", "--p", "3", "--json"]);
    assert_eq!(v["tau_V"]["value"], 1);
    assert_eq!(v["classify"]["kind"], "Morse");
    assert_eq!(v["determinacy"]["order"], 2);
    assert_eq!(v["tau_Delta"], "2/3");
}

#[test]
fn regular_report() {
    for p in ["3", "5", "7"] {
        let v = json(&["invariants", "x1", "--p", p, "--json"]);
        assert_eq!(v["tau_V"]["value"], 0);
        assert_eq!(v["classify"]["kind"], "Regular");
    }
}

#[test]
fn tau_delta_flag_and_schema() {
    let v = json(&[
        "invariants",
        "p*x1",
        "--p",
        "3",
        "--tau-delta",
        "0",
        "--tau-delta",
        "x1",
        "--json",
    ]);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(
        keys,
        [
            "input",
            "config",
            "ord",
            "tilde",
            "tau_V",
            "mu_V",
            "tau_delta",
            "tau_Delta",
            "tau_pi",
            "ord_uniformizer",
            "determinacy",
            "classify",
            "certificates",
            "precision_events"
        ]
    );
    assert_eq!(v["tau_Delta"], "1/1");
    assert_eq!(v["tau_delta"].as_array().unwrap().len(), 2);
    assert_eq!(v["tau_delta"][0]["delta_values"][0], "0");
    // rationals are "a/b" strings
    assert!(v["tau_delta"][0]["value"].as_str().unwrap().contains('/'));
    assert_eq!(v["tau_pi"]["flag"], "UnramifiedUnsupported");
}

#[test]
fn ramified_tau_pi() {
    let v = json(&["invariants", "x1^3+pi^2", "--p", "3", "--eisenstein", "t^2-3", "--json"]);
    assert_eq!(v["tau_pi"], 3);
    assert_eq!(v["tau_Delta"]["flag"], "RamifiedUnsupported");
}

#[test]
fn byte_identical_output() {
    let args = [
        "invariants",
        "x1^2+x2^3+p^2",
        "--p",
        "5",
        "--seed",
        "11",
        "--json",
        "--tau-delta",
        "x1,x2",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn syntax_error_exits_2() {
    let out = run(&["tilde", "x1^^2", "--p", "3", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["module"], "cli");
    assert!(v["error"].as_str().unwrap().contains("offset 3"));
    assert!(v.get("bounds").is_some());
}

#[test]
fn bad_ring_exits_2() {
    let out = run(&["tilde", "x1", "--p", "4", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["module"], "coeff");
}

#[test]
fn inconclusive_is_success() {
    // p*x1*x2 is not isolated; its report carries flags but still succeeds
    let v = json(&["invariants", "p*x1*x2", "--p", "3", "--json"]);
    assert_eq!(v["tau_Delta"]["flag"], "NotFiniteUpToBounds");
    assert!(v["tau_Delta"]["bounds"]["degree"].is_number());
}

#[test]
fn batch_lines() {
    let path = std::env::temp_dir().join(format!("mixsing-batch-{}.txt", std::process::id()));
    std::fs::write(&path, "x1^2+p^2\n# skipped\n\np*x1\n").unwrap();
    let out = run(&["tilde", "--batch", path.to_str().unwrap(), "--p", "3", "--json"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["tilde"]["series"], "x1^2 + y^2");
    assert_eq!(lines[1]["tilde"]["series"], "x1*y");
}

#[test]
fn split_and_determinacy() {
    let v = json(&["split", "x1^2+x2^2+p^2", "--p", "5", "--json"]);
    assert_eq!(v["split"]["r"], 3);
    assert_eq!(v["split"]["k"], 2);
    let v = json(&["determinacy", "p^2+x1^2", "--p", "5", "--json"]);
    assert_eq!(v["determinacy"]["k"], 1);
    assert_eq!(v["determinacy"]["order"], 2);
}

#[test]
fn isolated_verdict() {
    let v = json(&["isolated", "x1^2+p^2", "--p", "3", "--json"]);
    assert_eq!(v["isolated"]["verdict"], "Isolated");
}
