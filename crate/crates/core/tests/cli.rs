use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_music-lite"));
    c.env_remove("MUSIC_LITE_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn grid_point_near_50() -> f64 {
    let step: f64 = 299_792_458.0 / (2.0 * 960e3) / 5000.0;
    (50.0 / step).round() * step
}

#[test]
fn help_and_version_leave_directory_untouched() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["sweep", "--help"]] {
        let o = bin().args(args).current_dir(dir.path()).output().unwrap();
        assert_eq!(code(&o), 0, "{args:?}");
        assert!(!stdout(&o).is_empty());
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&run(&["simulate", "--bogus"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn characterize_sampled_matches_fixture() {
    let o = run(&[
        "characterize",
        "--adder",
        "acla:16:4",
        "--sampled",
        "4194304",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let want = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/characterize_acla_16_4.csv"),
    )
    .unwrap();
    assert_eq!(stdout(&o), want);
}

#[test]
fn characterize_exhaustive_exact_has_zero_error() {
    let o = run(&["characterize", "--adder", "exact:8", "--exhaustive"]);
    assert_eq!(code(&o), 0);
    let row: Vec<String> = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(String::from)
        .collect();
    assert_eq!(&row[..4], ["exact:8", "8", "exhaustive", "65536"]);
    assert!(row[5..].iter().all(|v| v == "0"), "{row:?}");
}

#[test]
fn characterize_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let o = run(&[
        "characterize",
        "--adder",
        "loa:8:3",
        "--exhaustive",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&path)
        .unwrap()
        .starts_with("adder,width,mode"));
}

#[test]
fn characterize_rejects_oversized_exhaustive_and_bad_specs() {
    let o = run(&["characterize", "--adder", "exact:17", "--exhaustive"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("cap"), "{}", stderr(&o));
    assert_eq!(
        code(&run(&[
            "characterize",
            "--adder",
            "nope:16",
            "--sampled",
            "10"
        ])),
        2
    );
}

#[test]
fn noiseless_simulation_hits_grid_point() {
    let o = run(&["simulate", "--no-noise"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        v["estimated_range_m"].as_f64().unwrap(),
        grid_point_near_50()
    );
    assert_eq!(v["converged"], Value::Bool(true));
    assert_eq!(v["snr_db"], Value::Null);
}

#[test]
fn seeded_simulation_is_reproducible() {
    let a = run(&["simulate", "--snr", "10", "--seed", "42"]);
    let b = run(&["simulate", "--snr", "10", "--seed", "42"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["estimated_range_m"].as_f64().unwrap(), 50.05909480979167);
    let c = run(&["simulate", "--snr", "10", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_writes_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let o = run(&[
        "simulate",
        "--no-noise",
        "--spectrum",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("range_m,p_mu"));
    assert_eq!(text.lines().count(), 5001);
}

#[test]
fn malformed_and_unknown_config_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"ofdm\": {\n");
    let o = run(&["simulate", "-c", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
    let cfg = write_config(dir.path(), r#"{"scene": {"range": 3}}"#);
    let o = run(&["simulate", "-c", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("range"));
    assert_eq!(code(&run(&["simulate", "-c", "/nonexistent/cfg.json"])), 2);
}

#[test]
fn smoke_sweep_emits_reports_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"adders": ["cla:16", "trunc:16:2"], "sweep": {"snr_db": [5, 10], "runs": 3, "seed": 1}}"#,
    );
    let out = dir.path().join("out");
    let start = Instant::now();
    let o = run(&["sweep", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(start.elapsed().as_secs_f64() < 60.0);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["runs.csv", "aggregates.csv", "dse.csv", "dse_notes.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert_eq!(
        fs::read_to_string(out.join("runs.csv"))
            .unwrap()
            .lines()
            .count(),
        13
    );
}

#[test]
fn sweep_bytes_independent_of_jobs_and_seed_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"adders": ["exact:16"], "sweep": {"snr_db": [0, 10], "runs": 3, "seed": 5}}"#,
    );
    let report = |name: &str, extra: &[&str], jobs_env: Option<&str>| {
        let out = dir.path().join(name);
        let mut c = bin();
        c.args(["sweep", "-c", &cfg, "-o", out.to_str().unwrap()])
            .args(extra);
        if let Some(j) = jobs_env {
            c.env("MUSIC_LITE_JOBS", j);
        }
        assert_eq!(code(&c.output().unwrap()), 0);
        ["runs.csv", "aggregates.csv", "dse.csv"].map(|f| fs::read(out.join(f)).unwrap())
    };
    let a = report("a", &["--jobs", "1"], None);
    let b = report("b", &[], Some("3"));
    let c = report("c", &[], None);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let d = report("d", &["--seed", "6"], None);
    assert_ne!(a[0], d[0]);
}

#[test]
fn dse_constraints_filter_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "dse",
        "--adder",
        "cla:16",
        "--adder",
        "loa:16:4",
        "--runs",
        "2",
        "--constraints",
        "max_error_pct=1.0",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dse = fs::read_to_string(out.join("dse.csv")).unwrap();
    let adders: Vec<&str> = dse
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(adders, ["cla:16"]);
    let notes = fs::read_to_string(out.join("dse_notes.txt")).unwrap();
    assert!(notes.contains("loa:16:4") && notes.contains("max_error_pct"));
}

#[test]
fn dse_without_baseline_or_bounds_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "dse",
        "--adder",
        "trunc:16:2",
        "--runs",
        "1",
        "--constraints",
        "max_error_pct=1",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("baseline"));
    assert!(!out.exists());
    let o = run(&[
        "dse",
        "--adder",
        "cla:16",
        "--runs",
        "1",
        "--constraints",
        "bogus=1",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_with_no_converged_run_is_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"adders": ["acla:16:4"], "sweep": {"snr_db": [10], "runs": 1}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["sweep", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(out.join("runs.csv").is_file());
}

#[test]
fn checks_report_zero_violations() {
    let o = run(&["cordic-check", "--samples", "2000"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("violations 0/2000"), "{}", stdout(&o));
    let o = run(&["svd-check", "--matrices", "10", "--size", "6"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("non-converged 0"), "{}", stdout(&o));
}
