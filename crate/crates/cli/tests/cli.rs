use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abcweight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abcweight")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn small_toy_config(dir: &Path, method: &str) -> String {
    let path = dir.join("toy.toml");
    let text = format!(
        "method = \"{method}\"\nseed = 3\nn_sims = 400\nalpha_accept = 0.1\ngenerations = 2\nrepeats = 1\n\
         proposal_sd = 0.25\ntheta_star = [10.0]\nprior = [[1e-4, 1e4]]\n\n\
         [model]\nid = \"toy\"\ndraws = 10\nsorted = true\n\n\
         [optimizer]\nrestarts = 2\nmax_evaluations = 200\n\n\
         [metrics]\nn_ref = 500\n"
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn divergence_matches_hand_computed_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    fs::write(&x, "0\n1\n2\n").unwrap();
    let x = x.to_str().unwrap();
    let out = abcweight(&["divergence", "--x", x, "--y", x, "--k", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0.115552");
}

#[test]
fn divergence_rejects_ragged_rows() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    fs::write(&x, "0,1\n1\n").unwrap();
    let x = x.to_str().unwrap();
    let out = abcweight(&["divergence", "--x", x, "--y", x]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_writes_observation_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("death.csv");
    let out = abcweight(&["simulate", "--model", "death", "--seed", "4", "--out", out_file.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,species_1,z"));
    assert_eq!(lines.count(), 33);
}

#[test]
fn simulate_rejects_model_config_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_toy_config(dir.path(), "uniform");
    let out_file = dir.path().join("x.csv");
    let out = abcweight(&["simulate", "--model", "death", "--config", &cfg, "--out", out_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        fs::read_to_string(small_toy_config(dir.path(), "uniform"))
            .unwrap()
            .replace("alpha_accept = 0.1", "alpha_accept = 1.5"),
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = abcweight(&["infer", "--config", bad.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(abcweight(&["infer", "--preset", "nope", "--out-dir", "x"]).status.code(), Some(2));
    assert_eq!(abcweight(&["infer", "--preset", "toy-desk"]).status.code(), Some(2));
    assert_eq!(abcweight(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn infer_then_metrics_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_toy_config(dir.path(), "adaptive");
    let run = dir.path().join("run");
    let run = run.to_str().unwrap();
    let out = abcweight(&["infer", "--config", &cfg, "--out-dir", run]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["manifest.json", "metrics.json", "particles_gen2.csv", "weights.csv", "weight_trace.csv"] {
        assert!(Path::new(run).join(name).exists(), "{name}");
    }
    let written: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(run).join("metrics.json")).unwrap()).unwrap();
    let out = abcweight(&["metrics", "--run", run]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recomputed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["hellinger", "mean_bias", "mode_bias"] {
        let (a, b) = (written[key].as_f64().unwrap(), recomputed[key].as_f64().unwrap());
        assert!((a - b).abs() < 1e-9, "{key}: {a} vs {b}");
    }

    let again = abcweight(&["infer", "--config", &cfg, "--out-dir", run]);
    assert_eq!(again.status.code(), Some(2), "non-empty output directory is refused");
}

#[test]
fn scan_line_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_toy_config(dir.path(), "adaptive");
    let out_dir = dir.path().join("scan");
    let out = abcweight(&["scan-line", "--config", &cfg, "--points", "21", "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("scan_line.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("r,L"));
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn table1_from_config_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_toy_config(dir.path(), "adaptive");
    let out_dir = dir.path().join("t1");
    let out = abcweight(&["table1", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = fs::read_to_string(out_dir.join("table1.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4);
    for label in ["uniform_n1", "uniform_n2", "adaptive"] {
        assert!(rows.contains(label), "{label}");
    }
    assert!(out_dir.join("table1_summary.csv").exists());
}
