use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn halfline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn solve_finds_the_geometric_bound_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = halfline(&[
        "solve",
        "--k",
        "8",
        "--L",
        "12",
        "--nev",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("result.json"));
    let thr = r["threshold"].as_f64().unwrap();
    assert!((thr - 4.934802200544679).abs() < 1e-12);
    let discrete = r["discrete"].as_array().unwrap();
    assert!(!discrete.is_empty());
    let e = discrete[0]["value"].as_f64().unwrap();
    assert!(e > 0.0 && e < thr);
    assert!(r["bounds"].is_null());
    assert_eq!(r["metadata"]["converged"], Value::Bool(true));
    let csv = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().ends_with(",discrete"));
    assert!(out.join("timing.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = halfline(&[
            "solve",
            "--k",
            "4",
            "--L",
            "6",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(out.join("result.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&halfline(&["solve", "--d", "-1", "--out", out])), 2);
    assert_eq!(
        code(&halfline(&[
            "solve", "--d", "1", "--L", "0.5", "--out", out
        ])),
        2
    );
    assert_eq!(code(&halfline(&["solve", "--nev", "0", "--out", out])), 2);
    assert_eq!(code(&halfline(&["solve", "--bogus"])), 2);
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"domain": {"d": 1, "k": 4}, "extra": 1}"#).unwrap();
    assert_eq!(
        code(&halfline(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&halfline(&[
            "solve",
            "--config",
            "/nonexistent.json",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(code(&halfline(&["--help"])), 0);
}

#[test]
fn oracle_agrees_and_refuses_large_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = halfline(&[
        "solve",
        "--k",
        "4",
        "--L",
        "6",
        "--nev",
        "3",
        "--oracle",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = read_json(&out.join("result.json"));
    assert!(r["oracle"]["max_rel_disagreement"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["oracle"]["eigenvalues"].as_array().unwrap().len(), 3);
    let o = halfline(&[
        "solve",
        "--k",
        "16",
        "--L",
        "12",
        "--oracle",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unconverged_solve_writes_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"domain": {"d": 1, "k": 8, "L": 8}, "eigen": {"max_iter": 2}}"#,
    )
    .unwrap();
    let out = dir.path().join("u");
    let o = halfline(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    let r = read_json(&out.join("result.json"));
    assert_eq!(r["metadata"]["converged"], Value::Bool(false));
    assert!(!r["refused"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_is_seed_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = dir.path().join(format!("w{seed}"));
        let o = halfline(&[
            "sweep",
            "--k",
            "4",
            "--L",
            "6",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
        assert!(trace.starts_with("iteration,s_lo,s_hi,lambda_min,threshold"));
        read_json(&out.join("result.json"))["critical_sigma"]
            .as_f64()
            .unwrap()
    };
    let a = run("1");
    assert!(a < 0.0);
    assert_eq!(a, run("99"));
}

#[test]
fn sweep_rejects_a_bracket_without_sign_change() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"domain": {"d": 1, "k": 4, "L": 6}, "sweep": {"bracket": [-0.5, 0.0]}}"#,
    )
    .unwrap();
    let o = halfline(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn converge_writes_orders_and_rejects_equal_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = halfline(&[
        "converge",
        "--d",
        "inf",
        "--h",
        "0.4",
        "--L",
        "8",
        "--sigma-const",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("result.json"));
    let limit = r["extrapolation"]["limit"].as_f64().unwrap();
    assert!((limit + 2.0).abs() < 1e-2);
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "h,L,lambda_min,observed_order");

    let cfg = dir.path().join("m.json");
    std::fs::write(
        &cfg,
        r#"{"domain": {"d": null, "L": 8}, "converge": {"mesh": [0.4, 0.4, 0.4]}}"#,
    )
    .unwrap();
    let o = halfline(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_quick_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = halfline(&[
        "verify",
        "--fidelity",
        "quick",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(code(&o), 0, "{stdout}");
    let report = read_json(&dir.path().join("verify.json"));
    assert_eq!(report["outcomes"].as_array().unwrap().len(), 9);
}
