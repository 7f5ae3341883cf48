//! End-to-end runs of the `conelab` binary on small grids.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{"grid":{"radial":40,"angular":16}}"#;

fn conelab(dir: &Path, args: &[&str]) -> Output {
    let config = dir.join("config.json");
    if !config.exists() {
        fs::write(&config, SMALL).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_conelab"))
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

#[test]
fn hardy_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = conelab(dir.path(), &["hardy", "--n", "3", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/hardy.csv")).unwrap();
    assert!(csv.starts_with("n,p,field,quotient,constant\n"));
    let s = summary(dir.path());
    assert_eq!(s["command"], "hardy");
    assert_eq!(s["pass"], true);
    assert!(s.get("runtime_seconds").is_none());
}

#[test]
fn failing_checks_exit_one() {
    // The hat-space gate needs a fine grid near the vertex; on 40 rings it
    // cannot resolve the logarithmic divergence.
    let dir = tempfile::tempdir().unwrap();
    let out = conelab(dir.path(), &["verify-all", "--only", "hat-gate"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary(dir.path())["pass"], false);
    let rows = fs::read_to_string(dir.path().join("out/checks.csv")).unwrap();
    assert_eq!(rows.lines().count(), 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(conelab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(conelab(dir.path(), &["hardy", "--p", "2"]).status.code(), Some(2));
    assert_eq!(conelab(dir.path(), &["verify-all", "--only", "no-such-check"]).status.code(), Some(2));
    assert_eq!(conelab(dir.path(), &["norm", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(conelab(dir.path(), &["--suite", "nonsense(", "norm"]).status.code(), Some(2));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("config.json"), r#"{"grid":{"radial":"many"}}"#).unwrap();
    let out = conelab(dir.path(), &["norm"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let missing = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["--config", "/nonexistent/conelab.json", "norm"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let runs: Vec<_> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            fs::write(dir.path().join("config.json"), SMALL).unwrap();
            let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
                .env("CONELAB_THREADS", threads)
                .arg("--config")
                .arg(dir.path().join("config.json"))
                .arg("--out")
                .arg(dir.path().join("out"))
                .arg("cz")
                .output()
                .unwrap();
            assert_eq!(out.status.code(), Some(0));
            ["cz.csv", "cover.csv", "summary.json"]
                .map(|f| fs::read(dir.path().join("out").join(f)).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .env("CONELAB_THREADS", "zero")
        .arg("norm")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dumps_flow_through_split_extend_and_restrict() {
    use conelab::calculus::families::{make_test_field, TestFamily};
    use conelab::dump::{read_field, write_field};

    let dir = tempfile::tempdir().unwrap();
    let grid = conelab::config::RunConfig::default().grid(conelab::grid::GridKind::Double).unwrap();
    let input = dir.path().join("dipole.txt");
    fs::write(&input, write_field(&make_test_field(grid, TestFamily::Dipole))).unwrap();
    let input = input.to_str().unwrap();

    assert_eq!(conelab(dir.path(), &["split", "--input", input]).status.code(), Some(0));
    let anti = read_field(&dir.path().join("out/anti.txt")).unwrap();
    assert!(anti.max_abs() > 0.0);

    assert_eq!(conelab(dir.path(), &["extend", "--input", input]).status.code(), Some(0));
    let extended = dir.path().join("out/extended.txt");
    let out = conelab(dir.path(), &["restrict", "--input", extended.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let back = read_field(&dir.path().join("out/restricted.txt")).unwrap();
    let original = read_field(Path::new(input)).unwrap();
    let err = back.values().iter().zip(original.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * original.max_abs(), "round trip error {err}");

    // A cone dump is not a whole-plane field.
    assert_eq!(conelab(dir.path(), &["restrict", "--input", input]).status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    // The divergence tables need the default grid, which reaches 1e-12.
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("config.json"), "{}").unwrap();
    let out = conelab(dir.path(), &["--timing", "counterexample"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(summary(dir.path())["runtime_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(fs::read_to_string(dir.path().join("out/divergence.csv")).unwrap().lines().count(), 10);
}

#[test]
fn help_exits_zero() {
    let out = Command::new(env!("CARGO_BIN_EXE_conelab")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["norm", "hardy", "split", "cz", "kfunc", "extend", "restrict", "pierre", "density", "counterexample", "verify-all"] {
        assert!(text.contains(sub), "help lists {sub}");
    }
}
