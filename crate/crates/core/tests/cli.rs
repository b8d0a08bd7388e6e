use std::path::Path;
use std::process::{Command, Output};

use termite_hill::harness::{RESULTS_HEADER, SUMMARY_HEADER};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_termite-hill"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_run(out: &Path) -> (Vec<u8>, Vec<u8>) {
    let o = cli(&[
        "run",
        "table1-dynamic",
        "--nodes",
        "20",
        "--replications",
        "2",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (
        std::fs::read(out.join("table1-dynamic-termite-hill-n20.csv")).unwrap(),
        std::fs::read(out.join("table1-dynamic-termite-hill-n20-summary.csv")).unwrap(),
    )
}

#[test]
fn help_and_version_succeed() {
    assert!(cli(&["--help"]).status.success());
    assert!(cli(&["--version"]).status.success());
}

#[test]
fn bad_arguments_are_configuration_errors() {
    assert_eq!(cli(&["run", "table1-static", "--bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "no-such-profile"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "table1-static", "--nodes", "1"]).status.code(), Some(1));
    assert_eq!(cli(&["world", "--seeds", "0"]).status.code(), Some(1));
}

#[test]
fn builtin_profiles_validate() {
    for p in ["table1-static", "table1-dynamic"] {
        let o = cli(&["validate", p]);
        assert!(o.status.success());
        assert!(String::from_utf8_lossy(&o.stdout).contains("ok"));
    }
}

#[test]
fn scenario_files_with_unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, "name = bad\nnodes = 10\nwarp_drive = on\n").unwrap();
    let o = cli(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warp_drive"));
}

#[test]
fn repeated_runs_write_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = small_run(a.path());
    let second = small_run(b.path());
    assert_eq!(first, second);

    let results = String::from_utf8(first.0).unwrap();
    let mut lines = results.lines();
    assert_eq!(lines.next(), Some(RESULTS_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].contains(",aggregate,n=2,"));
    let summary = String::from_utf8(first.1).unwrap();
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
}

#[test]
fn world_prints_a_series() {
    let o = cli(&["world", "--termites", "20", "--woods", "10", "--size", "30", "--steps", "50", "--seeds", "2", "--sample-every", "10"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,live_piles,woods_in_piles,carried"));
    assert_eq!(lines.count(), 6);
}
