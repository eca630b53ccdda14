//! End-to-end runs of the `coverage` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EX1: &str = "[problem]\na = 0.0\nb = 1.0\nm = 3\nphi = \"x*(1 - x)\"\n";

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn coverage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coverage")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_config_flag_is_a_config_error() {
    let o = coverage(&["solve"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn unreadable_config_file_is_a_config_error() {
    let o = coverage(&["solve", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_polynomial_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[problem]\na = 0.0\nb = 1.0\nm = 3\nphi = \"x*(1 - \"\n");
    let o = coverage(&["solve", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_bad_settings_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{EX1}colour = \"red\"\n"));
    assert_eq!(code(&coverage(&["solve", "--config", &cfg])), 2);
    let cfg = write_config(dir.path(), &format!("{EX1}[lloyd.options]\nshrink_rho = 1.5\n"));
    assert_eq!(code(&coverage(&["lloyd", "--config", &cfg])), 2);
    let cfg = write_config(dir.path(), "[problem]\na = 1.0\nb = 0.0\nm = 3\nphi = \"1\"\n");
    assert_eq!(code(&coverage(&["solve", "--config", &cfg])), 2);
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&coverage(&["solve", "--method", "newton"])), 2);
    assert_eq!(code(&coverage(&["frobnicate"])), 2);
}

#[test]
fn plot_without_results_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), EX1);
    let out = dir.path().join("empty");
    let o = coverage(&["plot", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn solve_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("ex1.cfg");
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = coverage(&["solve", "--config", cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("44 complex / 32 real"), "{}", stdout(&o));
    }
    for name in ["candidates.json", "candidates.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name} differs between runs");
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(a.join("candidates.json")).unwrap()).unwrap();
    let w = json["winner"]["positions"].as_array().unwrap();
    assert!((w[1].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let csv = fs::read_to_string(a.join("candidates.csv")).unwrap();
    assert!(csv.starts_with("p1,p2,p3,objective,pin,hessian,source,gradient_norm"));
    assert_eq!(csv.lines().count(), 1 + json["candidates"].as_array().unwrap().len());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("ex1.cfg");
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = coverage(&["solve", "--config", cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        fs::read(a.join("candidates.csv")).unwrap(),
        fs::read(b.join("candidates.csv")).unwrap()
    );
}

#[test]
fn regeneration_finds_the_same_winner() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("ex1.cfg");
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("td"), dir.path().join("rg"));
    assert_eq!(code(&coverage(&["solve", "--config", cfg, "--out", a.to_str().unwrap()])), 0);
    let o = coverage(&["solve", "--config", cfg, "--out", b.to_str().unwrap(), "--method", "regeneration"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let read = |d: &Path| -> serde_json::Value {
        serde_json::from_slice(&fs::read(d.join("candidates.json")).unwrap()).unwrap()
    };
    let (td, rg) = (read(&a), read(&b));
    assert_eq!(rg["metadata"]["method"], "regeneration");
    let pos = |v: &serde_json::Value| -> Vec<f64> {
        v["winner"]["positions"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    for (x, y) in pos(&td).iter().zip(pos(&rg)) {
        assert!((x - y).abs() < 1e-8);
    }
    assert_eq!(td["candidates"].as_array().unwrap().len(), rg["candidates"].as_array().unwrap().len());
}

#[test]
fn dump_system_prints_every_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{EX1}[lloyd.options]\nmax_iters = 0\n"));
    let o = coverage(&["lloyd", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--dump-system"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    for pattern in ["# interior pattern", "# left pattern", "# right pattern", "# both pattern"] {
        assert!(text.contains(pattern), "{text}");
    }
}

#[test]
fn zero_iteration_lloyd_succeeds_with_initial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{EX1}[lloyd.options]\nmax_iters = 0\n[[lloyd.initial]]\nkind = \"explicit\"\npositions = [0.1, 0.5, 0.9]\n"),
    );
    let o = coverage(&["lloyd", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 2, "{trace}");
    assert!(lines[0].starts_with("run,label,iter,p1,p2,p3,objective,grad_norm,step"));
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&fields[..3], &["0", "explicit", "0"]);
    let p: Vec<f64> = fields[3..6].iter().map(|f| f.parse().unwrap()).collect();
    assert_eq!(p, vec![0.1, 0.5, 0.9]);
    assert!(stdout(&o).contains("max-iters"));
}

#[test]
fn strict_mode_fails_when_paths_fail() {
    let dir = tempfile::tempdir().unwrap();
    // a fixed coarse step with one corrector iteration cannot follow any path
    let tracker = "[solver.tracker]\ninitial_step = 0.25\nmin_step = 0.25\nmax_step = 0.25\nmax_corrector_iters = 1\ncorrector_tol = 1e-14\n";
    let cfg = write_config(dir.path(), &format!("{EX1}{tracker}"));
    let out = dir.path().to_str().unwrap();
    let o = coverage(&["solve", "--config", &cfg, "--out", out, "--strict"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("failed"));
    let o = coverage(&["solve", "--config", &cfg, "--out", out]);
    assert_ne!(code(&o), 3);
    assert!(stderr(&o).contains("warning"));
    // the candidate list is empty, so plot draws the density alone
    let o = coverage(&["plot", "--config", &cfg, "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("empty"));
    assert!(fs::read_to_string(dir.path().join("figure.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn compare_and_plot_on_example_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("ex2.cfg");
    let out = dir.path().to_str().unwrap();
    let o = coverage(&["compare", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("verdict symmetric(0.5): local"), "{text}");
    assert!(text.contains("verdict random(1): global"), "{text}");
    for name in ["candidates.json", "candidates.csv", "lloyd.json", "trace.csv", "comparison.csv", "figure.svg"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let svg = fs::read_to_string(dir.path().join("figure.svg")).unwrap();
    fs::remove_file(dir.path().join("figure.svg")).unwrap();
    let o = coverage(&["plot", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("figure.svg")).unwrap(), svg);
}
