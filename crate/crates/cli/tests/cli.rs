use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
[run]
seed = 3

[signal]
kind = ofdm
bandwidth_hz = 20e6
num_symbols = 8

[digital]
train_len = 2048
";

fn linsic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linsic")).args(args).output().unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = linsic(&["simulate", "--config", &cfg, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["pre.csv", "rf.csv", "digital.csv", "tune.csv", "report.txt"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    let total: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("total_db="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(total >= 70.0);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(linsic(&["simulate", "--config", &cfg, "--out", s(&a)]).status.success());
    assert!(linsic(&["simulate", "--config", &cfg, "--out", s(&b)]).status.success());
    for name in ["pre.csv", "rf.csv", "digital.csv", "tune.csv", "report.txt"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn bad_config_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[rf]\nvm_bits = 16\nvm_bits = 12\n");
    let o = linsic(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn sweeps_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = linsic(&["sweep-power", "--config", &cfg, "--dbm", "-10..-8", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep_power.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().starts_with("-10.00,"));

    let o = linsic(&[
        "sweep-bandwidth",
        "--config",
        &cfg,
        "--bw",
        "10e6,20e6",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("sweep_bandwidth.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("10000000,"));

    let o = linsic(&["sweep-bandwidth", "--config", &cfg, "--bw", "10e6,,", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_writes_one_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("spec");
    let o = linsic(&["spectrum", "--config", &cfg, "--stage", "digital", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(out.join("digital.csv").is_file());
    assert!(!out.join("rf.csv").exists());
}

#[test]
fn verify_exit_code_follows_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = linsic(&["verify", "--suite", "oracle-delay", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let verdict = fs::read_to_string(dir.path().join("verdict.txt")).unwrap();
    assert!(verdict.contains("overall=PASS"));

    let o = linsic(&["verify", "--suite", "filters", "--out", s(dir.path())]);
    let verdict = fs::read_to_string(dir.path().join("verdict.txt")).unwrap();
    let passed = verdict.contains("overall=PASS");
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }));
    assert!(verdict.contains("check.d1_3tap_closed_form=PASS"));

    assert_eq!(linsic(&["verify", "--suite", "nope"]).status.code(), Some(2));
}
