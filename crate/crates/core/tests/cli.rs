use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use newsdiff::engine::{self, SimulationConfig};
use newsdiff::io::read_series_csv;
use newsdiff::NewsRuleParams;

fn newsdiff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newsdiff"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_width_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(dir.path(), &["simulate", "--width", "0"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(!dir.path().join("series.csv").exists());
}

#[test]
fn small_torus_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(
        dir.path(),
        &[
            "simulate",
            "--width",
            "2",
            "--height",
            "5",
            "--boundary",
            "toroidal",
        ],
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&newsdiff(dir.path(), &["simulate", "--bogus"])), 1);
}

#[test]
fn step_budget_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(dir.path(), &["simulate", "--max-steps", "10"]);
    assert_eq!(code(&o), 3);
    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 11);
}

#[test]
fn simulate_writes_series_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(
        dir.path(),
        &[
            "simulate",
            "--width",
            "10",
            "--height",
            "10",
            "--snapshot-every",
            "5",
            "--pgm",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let observed = read_series_csv(text.as_bytes()).unwrap();
    for i in 0..observed.len() {
        let sum = observed.white[i] + observed.grey[i] + observed.black[i];
        assert!((sum - 1.0).abs() < 1e-8, "row {i}");
    }
    let snaps = dir.path().join("snapshots");
    for step in (0..observed.len()).step_by(5) {
        let txt = fs::read_to_string(snaps.join(format!("step_{step:06}.txt"))).unwrap();
        assert!(txt.starts_with("10 10 bounded\n"));
        let pgm = fs::read_to_string(snaps.join(format!("step_{step:06}.pgm"))).unwrap();
        assert!(pgm.starts_with("P2"));
    }
    let initial = fs::read_to_string(snaps.join("step_000000.txt")).unwrap();
    assert_eq!(initial.matches('#').count(), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("converged_at:"));
}

#[test]
fn eval_model_rows_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(dir.path(), &["eval-model", "--t-min", "0", "--t-max", "60"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("model.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x_g,x_w,x_b"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 61);
    for r in &rows {
        assert!((r[1] + r[2] + r[3] - 1.0).abs() < 1e-12);
    }
    assert!((rows[25][3] - 0.342_358_920_262_563_1).abs() < 1e-12);
}

#[test]
fn eval_model_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(dir.path(), &["eval-model", "--grey", "0.75,30,-0.1"]);
    assert_eq!(code(&o), 1);
    let o = newsdiff(dir.path(), &["eval-model", "--t-min", "5", "--t-max", "4"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn fit_on_too_few_points_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("short.csv");
    fs::write(&input, "t,x_g,x_w\n0,0.0,1.0\n1,0.1,0.9\n2,0.2,0.8\n").unwrap();
    let o = newsdiff(dir.path(), &["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "t,x_g,x_w\n0,0.0,1.0\n1,zero,0.9\n").unwrap();
    let o = newsdiff(dir.path(), &["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(dir.path(), &["fit", "--input", "/nonexistent/series.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fit_recovers_model_output() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&newsdiff(dir.path(), &["eval-model", "--t-max", "150"])),
        0
    );
    let model = dir.path().join("model.csv");
    let o = newsdiff(dir.path(), &["fit", "--input", model.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    let grey = &report["grey"]["params"];
    assert!((grey["tau"].as_f64().unwrap() - 30.0).abs() < 0.03);
    let white = &report["white"]["params"];
    assert!((white["gamma"].as_f64().unwrap() - 0.25).abs() < 2.5e-4);
    assert!(dir.path().join("comparison.csv").exists());
}

#[test]
fn single_run_ensemble_matches_its_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = newsdiff(
        dir.path(),
        &[
            "ensemble", "--runs", "1", "--width", "15", "--height", "15", "--seed", "9",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let config = SimulationConfig::<NewsRuleParams> {
        width: 15,
        height: 15,
        rng_seed: engine::derive_run_seed(9, 0),
        ..SimulationConfig::default()
    };
    let traj = engine::run(&config).unwrap();
    let text = fs::read_to_string(dir.path().join("mean_series.csv")).unwrap();
    let mean = read_series_csv(text.as_bytes()).unwrap();
    let direct = traj.fractions();
    assert_eq!(mean.len(), direct.len());
    for (i, f) in direct.iter().enumerate() {
        assert!((mean.grey[i] - f.grey).abs() < 1e-8);
        assert!((mean.white[i] - f.white).abs() < 1e-8);
    }
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_newsdiff"))
        .args(["eval-model", "--t-max", "3"])
        .env("NEWSDIFF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("model.csv").exists());
}

#[test]
fn replay_reproduces_simulation() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&newsdiff(a.path(), &["simulate", "--seed", "3"])), 0);
    let manifest = a.path().join("manifest.json");
    let o = newsdiff(
        b.path(),
        &["replay", "--manifest", manifest.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["series.csv", "manifest.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
