use std::path::{Path, PathBuf};

use exobounds::oracle::synthetic_panel;
use exobounds_cli::{run_with, Io};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn exec(args: &[&str], seed_env: Option<&str>) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = {
        let mut io = Io {
            stdout: &mut out,
            stderr: &mut err,
            seed_env: seed_env.map(str::to_string),
        };
        run_with(std::iter::once("exobounds").chain(args.iter().copied()), &mut io)
    };
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

const SAWTOOTH: &str = r#"[{"lo":0.0,"hi":0.5,"slope":2.0,"intercept":0.0},{"lo":0.5,"hi":1.0,"slope":2.0,"intercept":-1.0}]"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_sawtooth_passes_median_independence() {
    let dir = tempfile::tempdir().unwrap();
    let saw = write(dir.path(), "saw.json", SAWTOOTH);
    let o = exec(&["check", "--score", &saw, "--dist", "unif01", "--T", "0.5"], None);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["reports"][0]["verdict"], "pass");
    assert_eq!(v["direction_changes"], 1);

    let o = exec(&["check", "--score", &saw, "--T", "0.25", "--mean"], None);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["reports"][0]["verdict"], "fail");
    assert_eq!(v["reports"][0]["max_gap"], 0.25);
    assert_eq!(v["reports"][1]["verdict"], "fail");
}

fn scalar(o: &Outcome) -> (f64, f64) {
    assert_eq!(o.code, 0, "{}", o.stderr);
    let row = o.stdout.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    (cols[4].parse().unwrap(), cols[5].parse().unwrap())
}

#[test]
fn bounds_worked_example() {
    let base = ["bounds", "--a", "0.25", "--b", "0.75", "--p1", "0.5", "--param", "mean-Y0", "--quantiles", "identity"];
    let t = exec(&[&base[..], &["--kind", "T"]].concat(), None);
    assert_eq!(scalar(&t), (0.4375, 0.5625));
    let u = exec(&[&base[..], &["--kind", "U"]].concat(), None);
    assert_eq!(scalar(&u), (0.125, 0.875));
    let d = exec(&["bounds", "--kind", "T", "--delta", "0.25", "--p1", "0.5"], None);
    assert_eq!(scalar(&d), (0.4375, 0.5625));
}

#[test]
fn bounds_effects_and_curves() {
    let att = exec(&["bounds", "--kind", "T", "--delta", "0.25", "--p1", "0.5", "--param", "ATT", "--obs-mean", "1"], None);
    assert_eq!(scalar(&att), (1.0 - 0.5625, 1.0 - 0.4375));
    let qtt = exec(
        &["bounds", "--kind", "T", "--delta", "0.25", "--p1", "0.5", "--param", "QTT", "--at", "0.5", "--obs-quantile", "0.7"],
        None,
    );
    let (lo, hi) = scalar(&qtt);
    assert!((lo - 0.2).abs() < 1e-15 && (hi - 0.2).abs() < 1e-15);
    let curve = exec(&["bounds", "--kind", "U", "--delta", "0.1", "--p1", "0.3", "--param", "cdf-Y0", "--grid", "11"], None);
    assert_eq!(curve.code, 0);
    let c = exobounds::bounds::BoundCurve::from_csv(&curve.stdout).unwrap();
    assert_eq!(c.intervals().len(), 11);
    assert_eq!(c.param, "cdf-Y0");
}

#[test]
fn oracle_gap_is_within_two_over_n() {
    let o = exec(&["oracle", "--n", "200", "--kind", "U", "--a", "0.25", "--b", "0.75", "--p1", "0.5"], None);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let gap: f64 = o.stdout.lines().last().unwrap().trim_start_matches("max gap: ").parse().unwrap();
    assert!(gap <= 0.01);
    let suite = exec(&["oracle", "--suite", "--jobs", "2"], None);
    assert_eq!(suite.code, 0, "{}", suite.stderr);
    assert_eq!(suite.stdout.lines().filter(|l| l.ends_with(",true")).count(), 54);
}

#[test]
fn validation_errors_exit_one_and_name_the_field() {
    let o = exec(&["bounds", "--kind", "T", "--delta", "0.1", "--p1", "1.5"], None);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("--p1"), "{}", o.stderr);
    let o = exec(&["bounds", "--kind", "U", "--p1", "0.5"], None);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("--delta"));
    let o = exec(&["bounds", "--kind", "T", "--a", "0.2", "--p1", "0.5"], None);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("--b"));
    let o = exec(&["bounds", "--kind", "T", "--delta", "0.7", "--p1", "0.5"], None);
    assert_eq!(o.code, 1);
    let o = exec(&["oracle", "--frobnicate"], None);
    assert_eq!(o.code, 1);
    let o = exec(&["check", "--score", "x.json", "--dist", "cauchy", "--T", "0.5"], None);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("--dist"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = exec(&["simulate", "--panel", "10", "--out", &format!("{out}/p.csv")], Some("abc"));
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("EXOBOUNDS_SEED"));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = exec(&["check", "--score", "/nonexistent/score.json", "--T", "0.5"], None);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("/nonexistent/score.json"));
    let bad = write(dir.path(), "bad.csv", "y,x\n0.1,0\n0.2,2\n");
    let cfg = write(dir.path(), "cfg.json", r#"{"outcome":"y","treatment":"x"}"#);
    let out = dir.path().join("out").to_string_lossy().into_owned();
    let o = exec(&["sensitivity", &bad, "--config", &cfg, "--out", &out], None);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("row 2"), "{}", o.stderr);
    let cfg = write(dir.path(), "cfg2.json", r#"{"outcome":"wage","treatment":"x"}"#);
    let o = exec(&["sensitivity", &bad, "--config", &cfg, "--out", &out], None);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("wage"));
}

#[test]
fn every_subcommand_documents_its_concept() {
    let expected = [
        ("check", "T-independence"),
        ("bounds", "Sharp bounds"),
        ("sensitivity", "breakdown points"),
        ("oracle", "LP extremal"),
        ("simulate", "propensity"),
    ];
    for (cmd, phrase) in expected {
        let o = exec(&[cmd, "--help"], None);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains(phrase), "{cmd}: {}", o.stdout);
    }
}

#[test]
fn seed_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let saw = write(dir.path(), "saw.json", SAWTOOTH);
    let path = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let run = |out: &str, seed: &str, env: Option<&str>| {
        let o = exec(&["simulate", "--score", &saw, "--n", "500", "--seed", seed, "--out", out], env);
        assert_eq!(o.code, 0, "{}", o.stderr);
        std::fs::read(out).unwrap()
    };
    let a = run(&path("a.csv"), "1", Some("2"));
    let b = run(&path("b.csv"), "2", None);
    let c = run(&path("c.csv"), "1", None);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn simulated_data_feeds_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let saw = write(dir.path(), "saw.json", SAWTOOTH);
    let csv = dir.path().join("sim.csv").to_string_lossy().into_owned();
    assert_eq!(exec(&["simulate", "--score", &saw, "--n", "2000", "--seed", "5", "--out", &csv], None).code, 0);
    let cfg = write(dir.path(), "cfg.json", r#"{"outcome":"y","treatment":"x"}"#);
    let out = dir.path().join("out");
    let o = exec(
        &["sensitivity", &csv, "--config", &cfg, "--out", &out.to_string_lossy(), "--deltas", "11", "--params", "CATT,CQTT(0.25)"],
        None,
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    for name in ["cell0_catt_T.csv", "cell0_cqtt_0.25_U.csv", "summary.json", "run.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn bundled_panel_is_the_seeded_synthetic_panel() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = dir.path().join("panel.csv");
    synthetic_panel(448, 2019).unwrap().write_csv(&fresh).unwrap();
    let bundled = std::fs::read(data_dir().join("panel448.csv")).unwrap();
    assert_eq!(bundled, std::fs::read(&fresh).unwrap());
}
