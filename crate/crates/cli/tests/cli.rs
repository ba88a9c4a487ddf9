use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hartogs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hartogs")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn kernel_eval_on_the_diagonal() {
    let out = hartogs(&["kernel", "eval", "--id", "hartogs", "--z", "0,0,0.5,0", "--zeta", "0,0,0.5,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let want = 64.0 / (9.0 * PI * PI);
    assert!((num(&v["value_re"]) - want).abs() < 1e-14 * want);
    assert_eq!(num(&v["value_im"]), 0.0);
    assert!(v["config_fingerprint"].is_string());
    assert_eq!(v["seed"], 0);
}

#[test]
fn kernel_eval_accepts_product_model_aliases() {
    let out = hartogs(&["kernel", "eval", "--id", "disc", "--w", "0.2,-0.1", "--eta", "-0.3,0.4"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn project_monomial_counterexample() {
    let v = json(&hartogs(&["project", "monomial", "--a", "0", "--b", "0", "--c", "0", "--d", "1"]));
    assert_eq!(v["coeff"], serde_json::json!({"num": 1, "den": 2, "pi_power": 0}));
    assert_eq!(v["alpha"], 0);
    assert_eq!(v["beta"], -1);
}

#[test]
fn verify_tangential_is_exact() {
    let out = hartogs(&["verify", "tangential", "--b", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["max_abs_residual"], 0);
}

#[test]
fn norm_matches_exact_value() {
    let v = json(&hartogs(&["norm", "--k", "0", "--p", "2", "--f", "zb2"]));
    let want = (PI * PI / 3.0).sqrt();
    assert!((num(&v["value"]) - want).abs() < 1e-9);
    assert_eq!(v["exact_norm_sq"], serde_json::json!({"num": 1, "den": 3, "pi_power": 2}));
    assert!(num(&v["error_estimate"]) < 1e-9);
    assert!(v["grid_fingerprint"].is_string());
}

#[test]
fn project_numeric_reproduces_counterexample() {
    let v = json(&hartogs(&["project", "numeric", "--id", "hartogs", "--f", "zb2", "--at", "0.1,0,0.5,0.1"]));
    // (1/2)/z₂ at z₂ = 0.5 + 0.1i
    let n = 0.5f64.powi(2) + 0.1f64.powi(2);
    let want = (0.5 * 0.5 / n, -0.5 * 0.1 / n);
    assert!((num(&v["value_re"]) - want.0).abs() < 1e-6);
    assert!((num(&v["value_im"]) - want.1).abs() < 1e-6);
}

#[test]
fn counterexample_at_p4_exits_divergent() {
    let out = hartogs(&["probe", "counterexample", "--k", "1", "--p", "4"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["report"]["fit"]["verdict"], "log-divergent");
    let vals: Vec<f64> = v["report"]["values"].as_array().unwrap().iter().map(num).collect();
    let base = vals[0];
    for (i, x) in vals.iter().enumerate() {
        assert!((x / base - (i + 1) as f64).abs() < 0.1 * (i + 1) as f64);
    }
}

#[test]
fn counterexample_below_four_is_bounded() {
    let out = hartogs(&["probe", "counterexample", "--k", "0", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["fit"]["verdict"], "bounded");
}

#[test]
fn window_probe_verdicts() {
    let out = hartogs(&["probe", "window", "--p", "2,3,4", "--family-size", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    let e = v["entries"].as_array().unwrap();
    assert_eq!(e[0]["verdict"], "bounded");
    assert!(num(&e[0]["family"]["max"]) <= 1.0 + 1e-6);
    assert_eq!(e[1]["verdict"], "bounded");
    assert_eq!(e[2]["verdict"], "log-divergent");
}

#[test]
fn csv_has_one_row_per_member() {
    let out = hartogs(&["probe", "estimate", "--k", "0", "--p", "2", "--family-size", "7", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "config_fingerprint,seed,k,p,member,ratio");
    assert_eq!(lines.len(), 8);
}

#[test]
fn output_is_reproducible() {
    let args = ["probe", "estimate", "--k", "1", "--p", "3", "--family-size", "5", "--seed", "7"];
    let a = hartogs(&args);
    let b = hartogs(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 7);
    let c = hartogs(&["probe", "estimate", "--k", "1", "--p", "3", "--family-size", "5", "--seed", "8"]);
    assert_ne!(json(&a)["config_fingerprint"], json(&c)["config_fingerprint"]);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["kernel", "eval", "--id", "nowhere", "--z", "0,0", "--zeta", "0,0"],
        &["kernel", "eval", "--id", "disc", "--z", "0,0,1", "--zeta", "0,0"],
        &["kernel", "eval", "--id", "hartogs", "--z", "0.6,0,0.5,0", "--zeta", "0,0,0.5,0"],
        &["norm", "--k", "0", "--p", "1", "--f", "z1"],
        &["norm", "--k", "0", "--p", "2", "--f", "z1 +"],
        &["project", "monomial", "--a", "-1", "--b", "0"],
    ] {
        let out = hartogs(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn config_file_handling() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let out = hartogs(&["verify", "tangential", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let with = json(&hartogs(&["verify", "tangential", "--config", empty.to_str().unwrap()]));
    let without = json(&hartogs(&["verify", "tangential"]));
    assert_eq!(with["config_fingerprint"], without["config_fingerprint"]);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\ngrading = 1.5\n").unwrap();
    let out = hartogs(&["verify", "tangential", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grading"));
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let t = target.to_str().unwrap();
    let out = hartogs(&["norm", "--k", "0", "--p", "0.5", "--f", "z1", "--output", t]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    let out = hartogs(&["verify", "tangential", "--output", t]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(Path::new(t)).unwrap()).unwrap();
    assert_eq!(v["command"], "verify tangential");
}

#[test]
fn thread_count_from_environment() {
    let run = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_hartogs"))
            .args(["probe", "estimate", "--k", "0,1", "--p", "1.5,3", "--family-size", "4"])
            .env("HARTOGS_THREADS", n)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}
