use std::path::Path;
use std::process::{Command, Output};

fn vissm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vissm")).args(args).output().expect("spawn vissm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn oscillators(steps: usize) -> String {
    let mut s = String::from("a,b,c\n");
    for t in 0..steps {
        let t = t as f64;
        s.push_str(&format!("{},{},{}\n", (0.2 * t).sin(), (0.13 * t).cos(), (0.2 * t + 1.0).sin()));
    }
    s
}

#[test]
fn check_passes_by_default() {
    let o = vissm(&["check", "--cases", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for suite in ["coupling", "depth", "stability", "zoh", "aggregation", "equivariance", "scan", "spectral"] {
        assert!(out.lines().any(|l| l.starts_with(suite) && l.contains("pass")), "{suite} missing:\n{out}");
    }
}

#[test]
fn broken_coupling_fails_with_counterexample() {
    let o = vissm(&["check", "--suites", "equivariance", "--break-coupling"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.contains("counterexample:")).expect("counterexample line");
    let json: serde_json::Value = serde_json::from_str(line.split_once(": ").unwrap().1).unwrap();
    assert_eq!(json["suite"], "equivariance");
    assert!(json["max_abs_deviation"].as_f64().unwrap() > 0.0);
    assert!(json["perm"].is_array());
}

#[test]
fn same_seed_same_report() {
    let a = vissm(&["check", "--seed", "11", "--cases", "5"]);
    let b = vissm(&["check", "--seed", "11", "--cases", "5"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(vissm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(vissm(&["check", "--suites", "nope"]).status.code(), Some(2));
    assert_eq!(vissm(&["bench", "--vars", "16,x"]).status.code(), Some(2));
    assert_eq!(vissm(&["simulate", "--study", "sideways"]).status.code(), Some(2));
    assert_eq!(vissm(&["simulate", "--trials", "1", "--vars", "16", "--seq", "200"]).status.code(), Some(2));
    assert_eq!(vissm(&["simulate", "--study", "cscaling", "--vars", "20"]).status.code(), Some(2));
    assert_eq!(vissm(&["forecast"]).status.code(), Some(2));
}

#[test]
fn invalid_config_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let input = write(dir.path(), "x.csv", &oscillators(200));
    let o = vissm(&[
        "forecast", "--input", &input, "--delta-long", "0.5", "--delta-short", "1.0", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());

    let cfg = write(dir.path(), "bad.kv", "seed = 1\nunknown_key = 3\n");
    let o = vissm(&["check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown_key"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.kv", "# suites to run\nsuites = zoh\ncases = 3\n");
    let o = vissm(&["check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "zoh           pass 3/3");
    let o = vissm(&["check", "--config", &cfg, "--suites", "spectral"]);
    assert!(stdout(&o).starts_with("spectral"));
}

#[test]
fn io_errors_exit_3_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = vissm(&["forecast", "--input", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let bad = write(dir.path(), "bad.csv", "a,b\n1,2\n3,4\n5,oops\n");
    let o = vissm(&["forecast", "--input", &bad]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bad.csv:4"), "{}", stderr(&o));

    let ragged = write(dir.path(), "ragged.csv", "1,2\n3\n");
    assert_eq!(vissm(&["forecast", "--input", &ragged]).status.code(), Some(3));

    let missing_cfg = dir.path().join("none.kv");
    assert_eq!(vissm(&["check", "--config", missing_cfg.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn forecast_writes_predictions_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "osc.csv", &oscillators(300));
    let out = dir.path().join("fc");
    let o = vissm(&["forecast", "--input", &input, "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    let mae = metrics["model"]["mae"].as_f64().unwrap();
    assert!(mae < metrics["persistence"]["mae"].as_f64().unwrap());

    let mut rdr = csv::Reader::from_path(out.join("predictions.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["step", "a", "b", "c"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let first = metrics["first_target"].as_u64().unwrap();
    assert_eq!(rows[0][0].parse::<u64>().unwrap(), first);
    assert_eq!(rows.len() as u64, 300 - first);
}

#[test]
fn forecast_too_short_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "short.csv", &oscillators(12));
    let o = vissm(&["forecast", "--input", &input]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn bench_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = vissm(&["bench", "--vars", "16,32", "--seq", "64", "--repeats", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(out.join("bench.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["engine", "C", "median_seconds", "mae", "mape"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(["vi", "ordered"].contains(&&r[0]));
        assert!(r[2].parse::<f64>().unwrap() > 0.0);
        assert!(r[3].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn simulate_permutation_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = vissm(&[
        "simulate", "--vars", "16", "--seq", "240", "--trials", "3", "--out", out.to_str().unwrap(), "--seed", "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("permutation_C16.json")).unwrap()).unwrap();
    let vi = summary["aggregates"].as_array().unwrap().iter().find(|a| a["engine"] == "vi").unwrap();
    assert_eq!(vi["mae"]["std"].as_f64().unwrap(), 0.0);
    let csv_text = std::fs::read_to_string(out.join("permutation_C16.csv")).unwrap();
    assert!(csv_text.starts_with("trial,engine,vars,mae,mape,mse,seconds\n"));
    assert_eq!(csv_text.lines().count(), 1 + 3 * 3);
}

#[test]
fn simulate_to_stdout_is_json() {
    let o = vissm(&["simulate", "--vars", "16", "--seq", "200", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["study"], "permutation");
}

fn read_predictions(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn forecast_into(dir: &Path, name: &str, text: &str) -> (Vec<String>, Vec<Vec<f64>>, serde_json::Value) {
    let input = write(dir, &format!("{name}.csv"), text);
    let out = dir.join(name);
    let o = vissm(&["forecast", "--input", &input, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = read_predictions(&out.join("predictions.csv"));
    let metrics = serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    (h, rows, metrics)
}

#[test]
fn simulate_same_seed_same_summary() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = vissm(&["simulate", "--vars", "16", "--seq", "200", "--trials", "2", "--seed", "7", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(out.join("permutation_C16.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn forecast_noiseless_var_beats_persistence() {
    // Two damped rotations, x[t] = W x[t-1] with no noise.
    let (r, th1, th2) = (0.995f64, 0.3f64, 0.17f64);
    let w = [
        [r * th1.cos(), -r * th1.sin(), 0.0, 0.0],
        [r * th1.sin(), r * th1.cos(), 0.0, 0.0],
        [0.0, 0.0, r * th2.cos(), -r * th2.sin()],
        [0.1, 0.0, r * th2.sin(), r * th2.cos()],
    ];
    let mut x = [1.0, 0.0, 0.5, -0.5];
    let mut text = String::new();
    for _ in 0..240 {
        text.push_str(&x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        text.push('\n');
        x = std::array::from_fn(|i| (0..4).map(|j| w[i][j] * x[j]).sum());
    }
    let dir = tempfile::tempdir().unwrap();
    let (_, _, m) = forecast_into(dir.path(), "var", &text);
    assert!(m["model"]["mse"].as_f64().unwrap() < m["persistence"]["mse"].as_f64().unwrap(), "{m}");
}

#[test]
fn forecast_constant_series_stays_constant() {
    let text: String = (0..120).map(|_| "2.5,-1\n").collect();
    let dir = tempfile::tempdir().unwrap();
    let (_, rows, _) = forecast_into(dir.path(), "const", &text);
    for row in rows {
        assert!((row[1] - 2.5).abs() < 1e-6 && (row[2] + 1.0).abs() < 1e-6, "{row:?}");
    }
}

#[test]
fn forecast_column_shuffle_only_moves_columns() {
    let base = oscillators(200);
    let shuffled: String = base
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{},{},{}\n", f[2], f[0], f[1])
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let (h1, r1, m1) = forecast_into(dir.path(), "base", &base);
    let (h2, r2, m2) = forecast_into(dir.path(), "shuf", &shuffled);
    assert_eq!(h2, ["step", "c", "a", "b"]);
    assert_eq!(h1, ["step", "a", "b", "c"]);
    for (a, b) in r1.iter().zip(&r2) {
        assert_eq!(a[0], b[0]);
        assert_eq!([a[3], a[1], a[2]], [b[1], b[2], b[3]]);
    }
    assert_eq!(m1["model"], m2["model"]);
}
