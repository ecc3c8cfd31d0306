use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dlrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlrisk")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = dlrisk(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Rows of a CSV as floats keyed by header; empty cells become NaN.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| if v.is_empty() { f64::NAN } else { v.parse().unwrap() }).collect())
        .collect();
    (head, rows)
}

fn col(head: &[String], name: &str) -> usize {
    head.iter().position(|h| h == name).unwrap()
}

fn write_values(path: &Path, values: impl Iterator<Item = f64>) {
    let mut s = String::from("value\n");
    for v in values {
        s.push_str(&format!("{v}\n"));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn selftest_passes_and_fails_when_tightened() {
    let out = ok(&["selftest"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["(= 4)", "3+2sqrt2", "4/(1-p)", "1+2/(1-p)", "M^o(8)", "m^o(8)"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    let out = dlrisk(&["selftest", "--tol-scale", "1e-20"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn dl_sample_is_deterministic_and_directional() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |o: &Path| {
        vec![
            "sample".to_string(),
            "--margF=pareto:1,1".into(),
            "--margG=pareto:2,1".into(),
            "--kind=dl".into(),
            "--size=100000".into(),
            "--seed=7".into(),
            format!("--out={}", o.display()),
        ]
    };
    for o in [&a, &b] {
        let v = args(o);
        ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let fa = fs::read(a.join("sample.csv")).unwrap();
    assert_eq!(fa, fs::read(b.join("sample.csv")).unwrap());
    assert_eq!(fs::read(a.join("sample.json")).unwrap(), fs::read(b.join("sample.json")).unwrap());
    let (_, rows) = table(&a.join("sample.csv"));
    assert_eq!(rows.len(), 100_000);
    assert!(rows.iter().all(|r| r[0] <= r[1]));
}

#[test]
fn countermonotone_uniform_sample_has_constant_sum() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "sample",
        "--margF",
        "uniform:0,1",
        "--margG",
        "uniform:0,1",
        "--kind",
        "countermonotone",
        "--size",
        "1000",
        "--out",
        out,
    ]);
    let (_, rows) = table(&dir.path().join("sample.csv"));
    assert!(rows.iter().all(|r| (r[0] + r[1] - 1.0).abs() < 1e-12));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    // Reversed order without --project.
    let r = dlrisk(&["bounds", "--margF", "uniform:0,2", "--margG", "uniform:0,1", "--out", out]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("max_violation"));
    // Malformed spec and bad levels.
    assert_eq!(
        dlrisk(&["bounds", "--margF", "gamma:1,2", "--margG", "uniform:0,1", "--out", out]).status.code(),
        Some(2)
    );
    let r = dlrisk(&["bounds", "--margF", "uniform:0,1", "--margG", "uniform:0,2", "--p-to", "1.2", "--out", out]);
    assert_eq!(r.status.code(), Some(2));
    // Missing file.
    let r = dlrisk(&["bounds", "--margF", "csv:/no/such/file.csv", "--margG", "uniform:0,1", "--out", out]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn project_repairs_crossing_empirical_inputs() {
    let dir = TempDir::new().unwrap();
    let (f, g) = (dir.path().join("f.csv"), dir.path().join("g.csv"));
    write_values(&f, (0..200).map(|i| i as f64 * 0.01));
    // G is larger except for a small crossing near the bottom.
    write_values(&g, (0..200).map(|i| if i < 10 { i as f64 * 0.005 } else { i as f64 * 0.012 }));
    let spec = |p: &Path| format!("csv:{}", p.display());
    let out = dir.path().join("o");
    let args = ["bounds", "--margF", &spec(&f), "--margG", &spec(&g), "--out", out.to_str().unwrap()];
    assert_eq!(dlrisk(&args).status.code(), Some(2));
    let mut with_project = args.to_vec();
    with_project.push("--project");
    ok(&with_project);
    let (head, rows) = table(&out.join("curve.csv"));
    let idx: Vec<usize> = ["L", "Lo", "Uo", "U"].iter().map(|n| col(&head, n)).collect();
    for r in &rows {
        assert!(idx.windows(2).all(|w| r[w[0]] <= r[w[1]] + 1e-9), "{r:?}");
    }
}

fn r_curve(dir: &Path, g: &str) -> Vec<f64> {
    let out = dir.join(g.replace([':', ','], "_"));
    ok(&["bounds", "--margF", "uniform:0,100", "--margG", g, "--out", out.to_str().unwrap()]);
    let (head, rows) = table(&out.join("curve.csv"));
    rows.iter().map(|r| r[col(&head, "R")]).collect()
}

#[test]
fn uniform_table_one_reductions() {
    let dir = TempDir::new().unwrap();
    let g1 = r_curve(dir.path(), "uniform:0,120");
    let g2 = r_curve(dir.path(), "uniform:0,140");
    let g3 = r_curve(dir.path(), "uniform:0,160");
    assert_eq!(g1.len(), 20);
    assert!(g1.iter().all(|&r| (0.3..=0.8).contains(&r)), "{g1:?}");
    for i in 0..g1.len() {
        assert!(g1[i] > g2[i] && g2[i] > g3[i]);
    }
}

#[test]
fn bounds_are_reproducible_and_nested() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "bounds",
            "--margF",
            "pareto:25,2",
            "--margG",
            "pareto:35,2",
            "--measure",
            "rvar",
            "--q",
            "0.999",
            "--grid-n",
            "2000",
            "--out",
            out.to_str().unwrap(),
        ]);
        out
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["curve.csv", "sums.csv", "reports/rvar_p0.9500.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let (head, rows) = table(&a.join("curve.csv"));
    let idx: Vec<usize> = ["L", "Lo", "Uo", "U"].iter().map(|n| col(&head, n)).collect();
    for r in &rows {
        assert!(idx.windows(2).all(|w| r[w[0]] <= r[w[1]] * (1.0 + 1e-9)), "{r:?}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("reports/rvar_p0.9500.json")).unwrap()).unwrap();
    for key in [
        "measure",
        "p",
        "q",
        "t",
        "constrained_worst",
        "constrained_best",
        "unconstrained_worst",
        "unconstrained_best",
        "R_L",
        "R_U",
        "R",
        "attaining",
        "grid_n",
        "truncation_m",
    ] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn identical_marginals_collapse_the_constrained_interval() {
    let dir = TempDir::new().unwrap();
    ok(&["bounds", "--margF", "normal:1,2", "--margG", "normal:1,2", "--out", dir.path().to_str().unwrap()]);
    let (head, rows) = table(&dir.path().join("curve.csv"));
    for r in &rows {
        assert!((r[col(&head, "Lo")] - r[col(&head, "Uo")]).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn pareto_probability_bounds() {
    let dir = TempDir::new().unwrap();
    ok(&[
        "probbounds",
        "--margF",
        "pareto:1,1",
        "--margG",
        "pareto:2,1",
        "--t-from",
        "2",
        "--t-to",
        "12",
        "--t-step",
        "2",
        "--grid-n",
        "20000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let (head, rows) = table(&dir.path().join("probbounds.csv"));
    let c = |n: &str| col(&head, n);
    // t = 2 lies below every attainable sum.
    assert!(rows[0][1..].iter().all(|&v| v == 0.0), "{:?}", rows[0]);
    let at8 = rows.iter().find(|r| r[c("t")] == 8.0).unwrap();
    assert!((at8[c("Mo")] - 5.0 / 7.0).abs() < 1e-6);
    assert!((at8[c("mo")] - 0.5).abs() < 1e-6);
    for r in rows.iter().filter(|r| r[c("t")] >= 8.0) {
        for k in ["prob_dl", "prob_ct"] {
            assert!(r[c("mo")] <= r[c(k)] && r[c(k)] <= r[c("Mo")], "{k} at t = {}", r[c("t")]);
        }
        assert!(r[c("m")] <= r[c("mo")] && r[c("Mo")] <= r[c("M")] + 1e-9);
    }
}

fn casestudy(dir: &Path, extra: &[&str]) -> Output {
    let (f, g) = (dir.join("f.csv"), dir.join("g.csv"));
    let out = dir.join("out");
    let mut args = vec![
        "casestudy",
        "--obs-f",
        f.to_str().unwrap(),
        "--obs-g",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--grid-n", "1000", "--seed", "3"]);
    dlrisk(&args)
}

fn preprocessing(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("out/preprocessing.json")).unwrap()).unwrap()
}

#[test]
fn casestudy_ordered_data_needs_no_projection() {
    let dir = TempDir::new().unwrap();
    write_values(&dir.path().join("f.csv"), (0..300).map(|i| (i as f64 / 300.0).powi(2)));
    write_values(&dir.path().join("g.csv"), (0..300).map(|i| 2.0 + (i as f64 / 300.0).powi(2)));
    let out = casestudy(dir.path(), &["--replicates", "400", "--group-f", "10", "--group-g", "10", "--project"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = preprocessing(dir.path());
    assert_eq!(log["projected"], false);
    assert_eq!(log["violation_before"], 0.0);
    assert!(dir.path().join("out/curve.csv").exists());
}

#[test]
fn casestudy_repairs_a_small_violation() {
    let dir = TempDir::new().unwrap();
    // Same body, G slightly lighter at the very top: an almost invisible crossing.
    write_values(&dir.path().join("f.csv"), (0..400).map(|i| i as f64));
    write_values(&dir.path().join("g.csv"), (0..400).map(|i| if i >= 396 { 395.0 } else { i as f64 + 1.0 }));
    let plain = casestudy(dir.path(), &["--replicates", "400", "--group-f", "1", "--group-g", "1", "--threshold", "0"]);
    assert_eq!(plain.status.code(), Some(2));
    let out = casestudy(dir.path(), &["--replicates", "400", "--group-f", "1", "--group-g", "1", "--project"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = preprocessing(dir.path());
    assert_eq!(log["projected"], true);
    assert!(log["violation_before"].as_f64().unwrap() > 0.0);
    assert_eq!(log["violation_after"], 0.0);
}

#[test]
fn casestudy_near_identical_tails_reduce_almost_fully() {
    let dir = TempDir::new().unwrap();
    // Identical upper halves, G shifted up on the lower half.
    write_values(&dir.path().join("f.csv"), (0..1000).map(|i| i as f64));
    write_values(&dir.path().join("g.csv"), (0..1000).map(|i| if i < 500 { i as f64 + 300.0 } else { i as f64 }));
    let out = casestudy(
        dir.path(),
        &[
            "--replicates",
            "4000",
            "--group-f",
            "1",
            "--group-g",
            "1",
            "--project",
            "--p-from",
            "0.9",
            "--p-to",
            "0.99",
            "--p-step",
            "0.01",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (head, rows) = table(&dir.path().join("out/curve.csv"));
    let r: Vec<f64> = rows.iter().map(|row| row[col(&head, "R")]).collect();
    assert!(r[r.len() - 1] > 0.8, "{r:?}");
    assert!(r[r.len() - 1] >= r[0] - 0.05, "{r:?}");
}
