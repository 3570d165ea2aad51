use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn oracle_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/oracle")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagspec"))
        .args(args)
        .env("LAGSPEC_ORACLE_CACHE", oracle_dir())
        .output()
        .expect("spawn lagspec")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Header and rows, each row keyed by column.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let (header, rows) = table(csv);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn max(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x))
}

#[test]
fn quad_five_point_rule() {
    let out = ok(&["quad", "--alpha", "0", "--n", "4"]);
    let (header, rows) = table(&out);
    assert_eq!(header, ["index", "node", "weight", "fun_weight"]);
    assert_eq!(rows.len(), 5);
    let w: f64 = rows[4][2].parse().unwrap();
    assert!((w - 2.337e-5).abs() < 5e-9, "{w}");
    // 17 significant digits
    assert_eq!(rows[4][2].split('e').next().unwrap().len(), 18);
}

#[test]
fn quad_single_point() {
    let out = ok(&["quad", "--alpha", "0", "--n", "0"]);
    assert_eq!(column(&out, "node"), [1.0]);
    assert_eq!(column(&out, "weight"), [1.0]);
}

#[test]
fn quad_thousand_points() {
    let out = ok(&["quad", "--alpha", "0", "--n", "999"]);
    let fw = column(&out, "fun_weight");
    assert_eq!(fw.len(), 1000);
    assert!(fw.iter().all(|v| v.is_finite() && *v > 0.0));
}

#[test]
fn radau_rule_starts_at_zero() {
    let out = ok(&[
        "quad", "--alpha", "0.5", "--n", "10", "--kind", "radau", "--format", "json",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 11);
    assert_eq!(v[0]["node"], 0.0);
}

#[test]
fn eval_small_degrees() {
    let out = ok(&["eval", "--alpha", "0", "--n", "2", "--x", "1"]);
    let p = column(&out, "poly_modified");
    assert_eq!(p, [1.0, 0.0, -0.5]);
    let f = column(&out, "fun_stable");
    assert!((f[0] - (-0.5f64).exp()).abs() < 1e-16);
}

#[test]
fn compare_difference_form_gains_two_digits() {
    let out = ok(&["compare", "--alpha", "0", "--n", "99"]);
    let s = column(&out, "rel_err_standard");
    let m = column(&out, "rel_err_modified");
    assert_eq!(s.len(), 100);
    assert!(max(&s[..10]) / max(&m[..10]) >= 100.0);
}

#[test]
fn compare_functions_at_scale() {
    let out = ok(&["compare", "--alpha", "0", "--n", "999", "--target", "fun"]);
    let (header, rows) = table(&out);
    let (si, fi) = (
        header.iter().position(|h| h == "rel_err_standard").unwrap(),
        header.iter().position(|h| h == "rel_err_stable").unwrap(),
    );
    let stable: Vec<f64> = rows.iter().map(|r| r[fi].parse().unwrap()).collect();
    assert!(stable.iter().all(|v| v.is_finite()));
    assert!(max(&stable[500..]) <= 1e-10);
    let bad: Vec<bool> = rows
        .iter()
        .map(|r| !r[si].parse::<f64>().unwrap().is_finite())
        .collect();
    let first = bad.iter().position(|&b| b).expect("naive weighting overflows");
    assert!(first > 500 && bad[first..].iter().all(|&b| b));
}

#[test]
fn compare_tiny_case_with_fresh_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lagspec"))
        .args(["compare", "--alpha", "0", "--n", "2"])
        .env("LAGSPEC_ORACLE_CACHE", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    for c in ["rel_err_standard", "rel_err_modified", "rel_err_stable"] {
        assert!(max(&column(&csv, c)) <= 1e-14, "{c}");
    }
    assert!(dir.path().join("a0_n2_poly_d24.csv").exists());
    assert!(dir.path().join("a0_n2_node_d24.meta.json").exists());
}

#[test]
fn solve_u1() {
    let out = ok(&[
        "solve",
        "--case",
        "u1",
        "--gamma",
        "2",
        "--beta",
        "4.47213595499958",
        "--n",
        "128",
        "--m",
        "256",
    ]);
    let (header, rows) = table(&out);
    assert_eq!(header, ["N", "beta", "l2_error", "h1_error", "error"]);
    assert_eq!(rows.len(), 1);
    assert!(rows[0][2].parse::<f64>().unwrap() < 1e-10);
    assert!(rows[0][4].is_empty());
}

fn argmin(v: &Value) -> Vec<(u64, f64)> {
    v["argmin"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["N"].as_u64().unwrap(), c["beta"].as_f64().unwrap()))
        .collect()
}

#[test]
fn sweep_u1_prefers_optimal_beta() {
    let out = ok(&[
        "sweep",
        "--case",
        "u1",
        "--k",
        "2",
        "--n-list",
        "32,64",
        "--beta-list",
        "1,2,4.47,8,16",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 10);
    // β outer, N inner
    assert_eq!(v["cells"][0]["beta"], 1.0);
    assert_eq!(v["cells"][1]["N"], 64);
    assert_eq!(argmin(&v), [(32, 4.47), (64, 4.47)]);
}

#[test]
fn sweep_u3_argmin_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let betas = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let out = ok(&[
        "sweep",
        "--case",
        "u3",
        "--k",
        "2",
        "--r",
        "3.5",
        "--n-list",
        "64,128",
        "--beta-list",
        "0.25,0.5,1,2,4,8",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(table(&out).1.len(), 12);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    let idx: Vec<usize> = argmin(&v)
        .iter()
        .map(|&(_, b)| betas.iter().position(|&x| x == b).unwrap())
        .collect();
    assert!(idx.iter().max().unwrap() - idx.iter().min().unwrap() <= 1, "{idx:?}");
}

#[test]
fn sweep_records_failed_cells() {
    let out = ok(&["sweep", "--case", "u1", "--n-list", "8", "--beta-list", "2,-1"]);
    let (_, rows) = table(&out);
    assert!(rows[0][4].is_empty());
    assert!(rows[1][2].is_empty() && rows[1][4].contains("beta"));
}

#[test]
fn errlab_without_perturbations() {
    let out = ok(&[
        "errlab",
        "--x",
        "0.05",
        "--n",
        "100",
        "--zeta-scale",
        "0",
        "--e1-scale",
        "0",
    ]);
    assert!(column(&out, "simulated_err").iter().all(|&v| v == 0.0));
}

#[test]
fn errlab_bound_dominates() {
    for mode in ["standard", "modified"] {
        let out = ok(&["errlab", "--alpha", "0", "--x", "0.05", "--n", "500", "--mode", mode]);
        let b = column(&out, "theory_bound");
        assert_eq!(b.len(), 501);
        for col in ["measured_err", "simulated_err"] {
            let e = column(&out, col);
            assert!(e.iter().zip(&b).all(|(e, b)| *e <= b * (1.0 + 1e-9)), "{mode} {col}");
        }
    }
}

#[test]
fn errlab_growth_factor_slope() {
    let out = ok(&["errlab", "--alpha", "1", "--x", "0.1", "--eta", "0.25", "--n", "1000"]);
    let b = column(&out, "beta_n");
    let want = 2.0 + 0.1 + 0.25 - 1.0;
    // rows n and n+1 carry β_{n−1}
    let slope = (b[1000] / b[100]).ln() / (998.0f64 / 98.0).ln();
    assert!((slope - want).abs() <= 0.1 * want, "slope {slope}");
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let sweep = dir.path().join(format!("sweep{i}.csv"));
        let lab = dir.path().join(format!("lab{i}.csv"));
        ok(&[
            "sweep",
            "--case",
            "u2",
            "--n-list",
            "16,32,48",
            "--beta-list",
            "0.5,1,2",
            "--out",
            sweep.to_str().unwrap(),
        ]);
        ok(&[
            "errlab",
            "--x",
            "0.3",
            "--n",
            "200",
            "--seed",
            "11",
            "--out",
            lab.to_str().unwrap(),
        ]);
        files.push((std::fs::read(sweep).unwrap(), std::fs::read(lab).unwrap()));
    }
    assert!(!files[0].0.is_empty() && !files[0].1.is_empty());
    assert_eq!(files[0], files[1]);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["quad", "--alpha", "-2", "--n", "3"]), 2);
    assert_eq!(code(&["quad", "--n"]), 2);
    assert_eq!(code(&["solve", "--case", "u4", "--n", "8", "--beta", "1"]), 2);
    assert_eq!(
        code(&["solve", "--case", "u1", "--n", "8", "--m", "4", "--beta", "1"]),
        2
    );
    let out = run(&["errlab", "--alpha", "1", "--x", "0.9", "--eta", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("-1.5"));
    // (1+x)^800 overflows at the quadrature nodes
    assert_eq!(
        code(&["solve", "--case", "u2", "--r", "-800", "--n", "16", "--beta", "1"]),
        3
    );
}
