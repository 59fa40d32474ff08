use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_hweyl");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("HWEYL_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn tau_csv_has_one_row_per_n() {
    let out = run(&["tau", "--l", "1", "--limit", "100", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,tau,d"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    assert_eq!(rows[0], "1,0,1");
    assert!(rows[99].starts_with("100,"));
}

#[test]
fn tau_json_embeds_resolved_config() {
    let v = json(&["tau", "--limit", "4"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    let cfg = &v["config"];
    assert_eq!(cfg["command"]["subcommand"], "tau");
    assert_eq!(cfg["command"]["l"], 1);
    assert_eq!(cfg["command"]["limit"], 4);
    assert_eq!(cfg["format"], "json");
}

#[test]
fn exact_check_reports_scaled_difference() {
    let v = json(&[
        "exact-check",
        "--l",
        "1",
        "--xmax",
        "2000",
        "--samples",
        "500",
    ]);
    let used = v["points_used"].as_u64().unwrap();
    let skipped = v["skipped"].as_u64().unwrap();
    assert_eq!(used + skipped, 500);
    let worst = v["max_scaled_difference"].as_f64().unwrap();
    assert!(worst > 0.0 && worst < 1.0, "{worst}");
    let max_seen = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["scaled_difference"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(max_seen, worst);
    assert_eq!(v["config"]["command"]["seed"], 1);
}

#[test]
fn moments_output_is_byte_identical() {
    let args = [
        "moments",
        "--l",
        "1",
        "--k",
        "2",
        "--T",
        "1e6",
        "--samples",
        "2e5",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    for key in [
        "seed",
        "samples",
        "T",
        "l",
        "k",
        "estimate",
        "predicted",
        "relative_deviation",
    ] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    assert_eq!(v["samples"], 200_000);
    assert_eq!(v["config"]["command"]["y"], 4096.0);
}

#[test]
fn thread_count_does_not_change_results() {
    let base = [
        "moments",
        "--k",
        "3",
        "--T",
        "1e4",
        "--samples",
        "5000",
        "--seed",
        "3",
    ];
    let mut one: Vec<&str> = base.to_vec();
    one.extend(["--threads", "1"]);
    let mut four: Vec<&str> = base.to_vec();
    four.extend(["--threads", "4"]);
    let mut a = json(&one);
    let mut b = json(&four);
    a.as_object_mut().unwrap().remove("config");
    b.as_object_mut().unwrap().remove("config");
    assert_eq!(a, b);
}

#[test]
fn absolute_moment_growth_lists_heights() {
    let v = json(&["moments", "--A", "2", "--T", "1e4,2e4", "--samples", "3000"]);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["relative_deviation"], 0.0);
    assert_eq!(v["config"]["command"]["T"], serde_json::json!([1e4, 2e4]));
}

#[test]
fn distribution_csv_columns() {
    let out = run(&[
        "distribution",
        "--samples",
        "3000",
        "--bins",
        "8",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bin_lo,bin_hi,density");
    assert_eq!(lines.len(), 9);
    let mass: f64 = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1] - f[0]) * f[2]
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn series_and_expansion_keys() {
    let v = json(&[
        "series",
        "--k",
        "2",
        "--v",
        "1",
        "--y",
        "100",
        "--doublings",
        "3",
    ]);
    for key in ["k", "v", "y", "value", "term_count"] {
        assert!(!v[key].is_null());
    }
    assert_eq!(v["convergence"].as_array().unwrap().len(), 4);
    let v = json(&["expansion", "--T", "1e4", "--samples", "2000"]);
    let ratio = v["emp"].as_f64().unwrap() / v["ref"].as_f64().unwrap();
    assert!((ratio - v["ratio"].as_f64().unwrap()).abs() < 1e-15);
    let y = v["config"]["command"]["y"].as_f64().unwrap();
    assert!((y - 1e4 / 1e4f64.ln().powi(2)).abs() < 1e-9);
}

#[test]
fn report_covers_orders_two_to_nine() {
    let v = json(&["report", "--l", "2", "--y", "64"]);
    assert_eq!(v["weyl_coefficient"], "2/15");
    assert_eq!(v["constants"].as_array().unwrap().len(), 8);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nl = 2\nlimit = 7\nformat = csv\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = run(&["tau", "--config", cfg, "--limit", "3"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    let direct = run(&["tau", "--l", "2", "--limit", "3", "--format", "csv"]);
    assert_eq!(out.stdout, direct.stdout);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "bins = 3\n").unwrap();
    let out = run(&["tau", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        &["tau", "--l", "0"][..],
        &["tau", "--l", "7"],
        &["nonsense"],
        &["moments", "--k", "2", "--A", "2"],
        &["moments", "--T", "10"],
        &["series", "--k", "2", "--v", "2"],
        &["distribution", "--t-lo", "1e5", "--t-hi", "1.5e5"],
        &["expansion", "--T", "1e4", "--y", "1e4"],
        &["tau", "--limit", "2.5"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn unwritable_output_exits_with_three() {
    let out = run(&[
        "tau",
        "--limit",
        "3",
        "--output",
        "/nonexistent-dir/out.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["tau", "--limit", "5", "--format", "csv"])
        .env("HWEYL_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("tau.csv")).unwrap();
    assert_eq!(written.lines().count(), 6);
}

#[test]
fn explicit_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["report", "--y", "32", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&path)).unwrap()).unwrap();
    assert_eq!(v["l"], 1);
}
