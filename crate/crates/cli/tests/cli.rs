use std::path::Path;
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_factorineq");

const HARDY: &str = r#"
n = 1
domain = [0, "inf"]
coefficients = ["alpha*x^(-1)", "1"]

[params]
alpha = -0.5

[verify]
corpus = 4
seed = 7
"#;

fn run(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for var in ["FACTORINEQ_TOL_SCAN", "FACTORINEQ_TOL_QUAD", "FACTORINEQ_GAP_TOL"] {
        cmd.env_remove(var);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &HARDY.replace("alpha = -0.5", ""));
    let cases: Vec<Vec<&str>> = vec![
        vec!["coeffs", "--bogus"],
        vec!["frobnicate"],
        vec!["catalog", "verify", "no_such_entry"],
        vec!["catalog", "verify", "trig_hardy", "--param", "zeta=1"],
        vec!["catalog", "verify", "trig_hardy", "--param", "alpha"],
        vec!["verify", "--config", &bad],
        vec!["verify", "--config", "/nonexistent/spec.toml"],
        vec!["construct", "--p", "1", "--g", "0", "--domain", "1"],
        vec!["hi-check", "--P", "1", "--R", "1"],
        vec!["zeros", "--bessel", "0,0"],
    ];
    for args in cases {
        let (code, _, err) = run(&args, &[]);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = run(&["--help"], &[]);
    assert_eq!(code, 0);
    assert!(out.contains("catalog"));
}

#[test]
fn verify_report_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hardy.toml", HARDY);
    let out1 = dir.path().join("r1.json");
    let out2 = dir.path().join("r2.json");
    for out in [&out1, &out2] {
        let (code, text, err) = run(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
        assert_eq!(code, 0, "{text}{err}");
    }
    let a = std::fs::read(&out1).unwrap();
    assert_eq!(a, std::fs::read(&out2).unwrap());
    let r = json(std::str::from_utf8(&a).unwrap());
    assert_eq!(r["tool"], "factorineq");
    assert_eq!(r["command"], "verify");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["corpus_seed"], 7);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["summary"]["verdict"], "pass");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    let per = r["per_function"].as_array().unwrap();
    assert_eq!(per.len(), 4);
    for f in per {
        for key in ["lhs", "rhs", "residual", "gap", "margin"] {
            assert!(!f[key].is_null(), "{key}");
        }
        let rhs: f64 = f["rhs"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
        let (lhs, res) = (f["lhs"].as_f64().unwrap(), f["residual"].as_f64().unwrap());
        assert!((lhs - rhs - res).abs() <= 1e-8 * (1.0 + res));
    }
    // flags override the config and the seed is echoed
    let (code, text, _) = run(&["--json", "verify", "--config", &cfg, "--seed", "9", "--corpus", "2"], &[]);
    assert_eq!(code, 0);
    let r2 = json(&text);
    assert_eq!(r2["seed"], 9);
    assert_eq!(r2["per_function"].as_array().unwrap().len(), 2);
    assert_ne!(r2["config_hash"], r["config_hash"]);
}

#[test]
fn toml_and_json_configs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = write(dir.path(), "c.toml", HARDY);
    let cfg: toml::Value = toml::from_str(HARDY).unwrap();
    let json_path = write(dir.path(), "c.json", &serde_json::to_string(&cfg).unwrap());
    let (c1, a, _) = run(&["--json", "verify", "--config", &toml_path], &[]);
    let (c2, b, e) = run(&["--json", "verify", "--config", &json_path], &[]);
    assert_eq!((c1, c2), (0, 0), "{e}");
    assert_eq!(a, b);
}

#[test]
fn environment_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hardy.toml", HARDY);
    let (_, base, _) = run(&["--json", "verify", "--config", &cfg], &[]);
    // a zero gap tolerance cannot be met by floating-point quadrature
    let (code, text, _) = run(&["--json", "verify", "--config", &cfg], &[("FACTORINEQ_GAP_TOL", "0")]);
    assert_eq!(code, 1);
    let r = json(&text);
    assert_eq!(r["settings"]["verify"]["gap_tol"], 0.0);
    assert_ne!(r["config_hash"], json(&base)["config_hash"]);
    let (code, text, _) = run(&["--json", "verify", "--config", &cfg], &[("FACTORINEQ_TOL_QUAD", "1e-6")]);
    assert_eq!(code, 0);
    assert_eq!(json(&text)["settings"]["verify"]["quad_tol"], 1e-6);
    for var in ["FACTORINEQ_TOL_SCAN", "FACTORINEQ_TOL_QUAD", "FACTORINEQ_GAP_TOL"] {
        let (code, _, err) = run(&["verify", "--config", &cfg], &[(var, "abc")]);
        assert_eq!(code, 2, "{var}");
        assert!(err.contains(var));
    }
    // a huge scan tolerance hides the negative trig_weight minimum
    let (code, _, _) = run(&["catalog", "verify", "trig_weight", "--param", "alpha=-5"], &[("FACTORINEQ_TOL_SCAN", "1e6")]);
    assert_eq!(code, 0);
}

#[test]
fn derive_writes_weight_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hardy.toml", HARDY);
    let csv = dir.path().join("w.csv");
    let (code, text, _) = run(&["derive", "--config", &cfg, "--grid", "50", "--out", csv.to_str().unwrap()], &[]);
    assert_eq!(code, 0, "{text}");
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "x,lhs,c_1_0");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 50);
    for r in rows {
        assert_eq!(r[1], 1.0);
        assert!((r[2] - 0.25 / (r[0] * r[0])).abs() <= 1e-12 * r[2]);
    }
    let negative = write(dir.path(), "neg.toml", &HARDY.replace("alpha = -0.5", "alpha = 0.5"));
    let (code, text, _) = run(&["derive", "--config", &negative, "--grid", "20"], &[]);
    assert_eq!(code, 1);
    assert!(text.contains("negative weight"));
}

#[test]
fn construct_with_initial_values() {
    // -(u')' = 0, u(0+) = 1, u'(0+) = 1: u = 1 + x, a0 = -1/(1 + x)
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a0.csv");
    let (code, text, err) =
        run(&["construct", "--p", "1", "--g", "0", "--domain", "0,1", "--ic", "1,1", "--grid", "20", "--out", csv.to_str().unwrap()], &[]);
    assert_eq!(code, 0, "{text}{err}");
    let table = std::fs::read_to_string(&csv).unwrap();
    for line in table.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let eps = 1e-6;
        assert!((v[3] + 1.0 / (1.0 + v[0] - eps)).abs() < 1e-9, "{line}");
    }
    // too large an interval: u = sin(x) vanishes at pi
    let (code, text, _) = run(&["construct", "--p", "1", "--g", "1", "--domain", "0,4", "--sigma", "1"], &[]);
    assert_eq!(code, 1);
    assert!(text.contains("changes sign at x = 3.14159"), "{text}");
}

#[test]
fn hi_check_verdicts() {
    let (code, text, _) = run(&["--json", "hi-check", "--P", "1", "--R", "1", "--critical"], &[]);
    assert_eq!(code, 0);
    let c = json(&text)["critical_c"].as_f64().unwrap();
    let j01 = 2.404825557695773f64;
    assert!((c - j01 * j01).abs() < 1e-7 * c, "{c}");
    assert_eq!(run(&["hi-check", "--P", "1", "--R", "1", "--c", "5.7"], &[]).0, 0);
    let (code, text, _) = run(&["hi-check", "--P", "1", "--R", "1", "--c", "5.9"], &[]);
    assert_eq!(code, 1);
    assert!(text.contains("changes sign"));
}

#[test]
fn zeros_and_catalog_browsing() {
    let (code, text, _) = run(&["zeros", "--bessel", "0,1", "--g", "1,0,1"], &[]);
    assert_eq!(code, 0);
    let vals: Vec<f64> = text.lines().map(|l| l.rsplit(' ').next().unwrap().parse().unwrap()).collect();
    assert!((vals[0] - 2.404825557695773).abs() < 1e-12);
    assert!((vals[1] - 1.841183781340659).abs() < 1e-12);

    let (code, text, _) = run(&["catalog", "list"], &[]);
    assert_eq!(code, 0);
    assert_eq!(text.lines().count(), 13);
    let (code, text, _) = run(&["--json", "catalog", "show", "trig_weight", "--param", "alpha=-5"], &[]);
    assert_eq!(code, 0);
    let r = json(&text);
    assert_eq!(r["admissible"], false);
    assert_eq!(r["params"]["alpha"], -5.0);
    assert_eq!(r["expected_weights"].as_array().unwrap().len(), 1);
}

#[test]
fn catalog_verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (code, _, _) = run(&["catalog", "verify", "trig_weight", "--param", "alpha=-5", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code, 1);
    let r = json(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(r["summary"]["verdict"], "fail");
    assert_eq!(r["seed"], 0);
    let failing: Vec<&Value> = r["records"].as_array().unwrap().iter().filter(|r| r["passed"] == false).collect();
    assert_eq!(failing.len(), 1);
    let x = failing[0]["x"].as_f64().unwrap();
    assert!(x > 0.0 && x < std::f64::consts::PI);
    assert!(failing[0]["value"].as_f64().unwrap() < 0.0);
}
