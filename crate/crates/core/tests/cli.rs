use std::fs;
use std::process::{Command, Output};

use xxz_berry::sweep::{self, OutputRecord};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xxz-berry")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eigen_prints_all_levels() {
    let o = bin(&["eigen", "--jx", "1", "--jz", "0", "--b0", "1", "--theta", "1.0471975511965976"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("-1.51413693"), "{text}");
    assert!(text.contains("3.08613020"), "{text}");
}

#[test]
fn eigen_csv_parses_back() {
    let o = bin(&["eigen", "--jx", "0.5", "--jz", "0.2", "--b0", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let records = sweep::read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(records.len(), 4);
    assert_eq!(records[0].n, 0);
    assert!(records[0].a.is_none());
    assert!((records[0].energy + 0.2 + 1.0).abs() < 1e-12);
}

#[test]
fn fully_degenerate_input_exits_2() {
    let o = bin(&["eigen", "--jx", "1", "--jz", "1", "--b0", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("E_0 = -3"));
}

#[test]
fn degenerate_pair_is_flagged_and_strict_exits_2() {
    // At the equator with a large anisotropy the ↑↑/↓↓ pair is split by only
    // ~B_0²/J.
    let args = ["eigen", "--jx", "1000", "--jz", "0", "--b0", "0.01", "--theta", "1.5707963267948966", "--format", "json"];
    let o = bin(&args);
    assert_eq!(o.status.code(), Some(0));
    let records: Vec<OutputRecord> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(records.iter().any(|r| r.degenerate));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(bin(&strict).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(bin(&["eigen", "--bogus"]).status.code(), Some(64));
    assert_eq!(bin(&["eigen", "--b0", "-1"]).status.code(), Some(64));
    assert_eq!(bin(&["eigen", "--theta", "4"]).status.code(), Some(64));
    assert_eq!(bin(&["sweep", "--preset", "nonsense"]).status.code(), Some(64));
    assert_eq!(bin(&[]).status.code(), Some(64));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["--version"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_74() {
    let o = bin(&["eigen", "--format", "csv", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(74));
}

#[test]
fn sweep_preset_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("xx.csv");
    let o = bin(&["sweep", "--preset", "xx", "--count", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let records = sweep::read_csv(fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(records.len(), 15);
    assert_eq!(records[0].n, 1);
    assert!((records[0].j_x - 1e-3).abs() < 1e-15);
    assert!((records.last().unwrap().j_x - 1e3).abs() < 1e-9);
    assert!(records.iter().all(|r| r.j_z == 0.0));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# point\njx = 2\njz=0.5\nb0 = 1\ntheta = 0.7\nformat = json\n").unwrap();
    let o = bin(&["eigen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: Vec<OutputRecord> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((r[0].j_x, r[0].j_z, r[0].theta), (2.0, 0.5, 0.7));

    let o = bin(&["eigen", "--config", cfg.to_str().unwrap(), "--jx", "3"]);
    let r: Vec<OutputRecord> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r[0].j_x, 3.0);

    fs::write(&cfg, "jx: 2\n").unwrap();
    assert_eq!(bin(&["eigen", "--config", cfg.to_str().unwrap()]).status.code(), Some(64));
}

#[test]
fn check_passes_and_is_reproducible() {
    let a = bin(&["check", "--samples", "200", "--seed", "9"]);
    let b = bin(&["check", "--samples", "200", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let summary: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(summary["passed"], true);
}

#[test]
fn impossible_tolerance_fails_check() {
    let o = bin(&["check", "--samples", "50", "--tol-eig", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fast_rotation_warns_and_strict_exits_3() {
    let args = ["evolve", "--jx", "1", "--jz", "1", "--b0", "1", "--omega", "0.5", "--level", "1"];
    let o = bin(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("AdiabaticityViolation"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(bin(&strict).status.code(), Some(3));
}

#[test]
fn tables_report_every_cell() {
    let o = bin(&["tables", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let cells: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cells = cells.as_array().unwrap();
    assert_eq!(cells.len(), 21);
    assert!(cells.iter().all(|c| c["pass"] == true));
}
