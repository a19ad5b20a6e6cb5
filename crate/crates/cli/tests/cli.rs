use std::path::Path;
use std::process::{Command, Output};

fn sfcrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfcrl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sfcrl(args);
    assert!(
        out.status.success(),
        "sfcrl {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn baseline_evaluation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&[
            "evaluate", "--scenario", "table3", "--agent", "greedy", "--servers", "8", "--reps", "3",
            "--horizon-hours", "4000", "--seed", "11", "--out", out.to_str().unwrap(),
        ]);
    }
    for f in ["metrics.csv", "summary.csv"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let text = String::from_utf8(read(&a.join("metrics.csv"))).unwrap();
    assert!(text.starts_with("run_id,seed,scenario,agent,acceptance_rate,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn train_then_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenario": "table1", "agent": "a2c", "servers": 4, "customers": 1,
            "episode_hours": 300, "log_interval": 200, "training_steps": 1000}"#,
    );
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    ok(&["train", "--config", &cfg, "--out", out_s]);
    let curve = read(&out.join("curve.csv"));
    let ckpt = read(&out.join("model.ckpt"));
    ok(&["train", "--config", &cfg, "--out", out_s]);
    assert_eq!(curve, read(&out.join("curve.csv")));
    assert_eq!(ckpt, read(&out.join("model.ckpt")));

    let text = String::from_utf8(curve).unwrap();
    let steps: Vec<u64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(steps.windows(2).all(|w| w[0] < w[1]), "{steps:?}");

    ok(&["evaluate", "--config", &cfg, "--reps", "2", "--horizon-hours", "500", "--out", out_s]);
    let first = read(&out.join("metrics.csv"));
    ok(&["evaluate", "--config", &cfg, "--reps", "2", "--horizon-hours", "500", "--out", out_s]);
    assert_eq!(first, read(&out.join("metrics.csv")));
}

#[test]
fn report_recomputes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ev");
    let out_s = out.to_str().unwrap();
    ok(&["evaluate", "--scenario", "table1", "--agent", "random", "--servers", "6", "--reps", "4", "--horizon-hours", "3000", "--out", out_s]);
    let summary = out.join("resummary.csv");
    let svg = out.join("box.svg");
    ok(&[
        "report", "--metrics", out.join("metrics.csv").to_str().unwrap(),
        "--out", summary.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(read(&summary), read(&out.join("summary.csv")));
    assert!(String::from_utf8(read(&svg)).unwrap().starts_with("<svg"));
}

#[test]
fn scenario_series_and_sweep_write_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series");
    ok(&[
        "scenario-series", "--scenario", "table3", "--servers", "6", "--reps", "2", "--horizon-hours", "2000",
        "--axis", "capacity", "--values", "4,8,16", "--out", series.to_str().unwrap(),
    ]);
    let text = String::from_utf8(read(&series.join("series.csv"))).unwrap();
    for v in ["capacity=4", "capacity=8", "capacity=16"] {
        assert_eq!(text.lines().filter(|l| l.contains(v)).count(), 2, "{v}");
    }

    let cfg = write_config(
        dir.path(),
        r#"{"scenario": "table1", "agent": "ppo2", "servers": 4, "customers": 1, "episode_hours": 300,
            "log_interval": 256, "repetitions": 1,
            "ppo2": {"n_steps": 32},
            "sweep": {"learning_rates": [0.0001, 0.001], "gammas": [0.9, 0.99]}}"#,
    );
    let sweep = dir.path().join("sweep");
    ok(&["sweep", "--config", &cfg, "--steps", "512", "--out", sweep.to_str().unwrap()]);
    let files: Vec<_> = std::fs::read_dir(&sweep)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("curve_"))
        .collect();
    assert_eq!(files.len(), 4, "{files:?}");
}

#[test]
fn rbd_prints_availability() {
    let text = ok(&["rbd", "--placement", "0:1,0:1"]);
    let line = text.lines().last().unwrap();
    let a: f64 = line.trim_start_matches("availability ").parse().unwrap();
    let s = 8760.0 / (8760.0 + 1.667);
    let v = 2880.0 / (2880.0 + 0.17);
    assert!((a - s * v * v).abs() < 1e-15);
}

#[test]
fn usage_errors_fail_cleanly() {
    let out = sfcrl(&["evaluate", "--scenario", "table1", "--agent", "ppo2", "--checkpoint", "/nonexistent/model.ckpt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = sfcrl(&["evaluate", "--config", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}
