//! Acceptance gate for the command line: a fixed seed must make `bench`
//! byte-reproducible.

use std::path::PathBuf;
use std::process::Command;

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn dnpi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dnpi"))
}

#[test]
fn acceptance_9_bench_raw_log_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let report = dir.path().join(format!("report_{tag}.txt"));
        let log = dir.path().join(format!("raw_{tag}.jsonl"));
        let output = dnpi()
            .args(["bench", "--seed", "42"])
            .arg("--data")
            .arg(data_path("lenses.csv"))
            .arg("--out")
            .arg(&report)
            .arg("--raw-log")
            .arg(&log)
            .output()
            .unwrap();
        assert!(output.status.success());
        (std::fs::read(&report).unwrap(), std::fs::read(&log).unwrap())
    };

    let (report_a, log_a) = run("a");
    let (report_b, log_b) = run("b");
    assert!(!log_a.is_empty());
    assert_eq!(log_a, log_b, "raw logs differ between identical runs");
    assert_eq!(report_a, report_b, "reports differ between identical runs");
    println!("ACCEPTANCE 9: PASS");
}
