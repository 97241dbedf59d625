//! End-to-end tests of the installed binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_drg-sim"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn run_emits_one_csv_row_and_repeats_byte_identically() {
    let go = || {
        let out = bin().args(["run", "--config"]).arg(fixture("tiny.json")).output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    let (a, b) = (go(), go());
    assert_eq!(a, b, "same config and seed must reproduce bytes");
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("scenario,protocol,density,seed,"));
    assert!(lines[1].starts_with("highway,drg,4,7,"));
}

#[test]
fn run_seed_override_changes_the_seed_column() {
    let out = bin()
        .args(["run", "--seed", "99", "--config"])
        .arg(fixture("tiny.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("highway,drg,4,99,"));
}

#[test]
fn run_json_parses_as_one_record() {
    let out = bin()
        .args(["run", "--format", "json", "--config"])
        .arg(fixture("tiny.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["scenario"], "highway");
    assert_eq!(v[0]["seed"], 7);
}

#[test]
fn sweep_orders_rows_density_protocol_replica() {
    let out = bin()
        .args(["sweep", "--jobs", "2", "--config"])
        .arg(fixture("tiny.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    let key = |row: &str| {
        let f: Vec<&str> = row.split(',').collect();
        (f[2].to_string(), f[1].to_string(), f[3].to_string())
    };
    let expect = [
        ("4", "drg", "7"),
        ("4", "drg", "8"),
        ("4", "flood", "7"),
        ("4", "flood", "8"),
        ("8", "drg", "7"),
        ("8", "drg", "8"),
        ("8", "flood", "7"),
        ("8", "flood", "8"),
    ];
    for (row, want) in rows.iter().zip(expect) {
        assert_eq!(key(row), (want.0.into(), want.1.into(), want.2.into()));
    }
}

#[test]
fn sweep_parallelism_does_not_change_bytes() {
    let go = |jobs: &str| {
        let out = bin()
            .args(["sweep", "--jobs", jobs, "--config"])
            .arg(fixture("tiny.json"))
            .output()
            .unwrap();
        assert!(out.status.success());
        stdout(&out)
    };
    assert_eq!(go("1"), go("4"));
}

#[test]
fn out_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("drg_cli_out_{}.csv", std::process::id()));
    let out = bin()
        .args(["run", "--config"])
        .arg(fixture("tiny.json"))
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("scenario,protocol,"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn theta_sorts_rows_ascending_by_threshold() {
    let out = bin().args(["theta", "0.6", "0.1", "0.391"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,d_root,theta_min_deg");
    assert!(lines[1].starts_with("0.1,"));
    assert!(lines[2].starts_with("0.391,1.0036338274372136,60.240558044206786"));
    assert!(lines[3].starts_with("0.6,"));
}

#[test]
fn theta_rejects_out_of_domain_threshold() {
    let out = bin().args(["theta", "0.9"]).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("0.78"), "must state the bound: {}", stderr(&out));
}

#[test]
fn validate_accepts_fixture_and_reports_ok() {
    let out = bin().args(["validate", "--config"]).arg(fixture("tiny.json")).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("ok:"));
}

#[test]
fn validate_names_the_offending_field_and_exits_2() {
    let out = bin()
        .args(["validate", "--config"])
        .arg(fixture("bad_threshold.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("drg.cr_threshold"));
}

#[test]
fn run_refuses_an_invalid_config() {
    let out = bin()
        .args(["run", "--config"])
        .arg(fixture("bad_threshold.json"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("drg.cr_threshold"));
}

#[test]
fn missing_config_file_is_a_clean_error() {
    let out = bin().args(["run", "--config", "/no/such/file.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/no/such/file.json"));
}

#[test]
fn malformed_json_reports_line_position() {
    let path = std::env::temp_dir().join(format!("drg_cli_bad_{}.json", std::process::id()));
    std::fs::write(&path, "{\n  \"scenario\": \"highway\",\n  \"seed\": oops\n}\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    std::fs::remove_file(&path).ok();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("line"), "parse errors carry positions: {}", stderr(&out));
}

#[test]
fn unknown_config_field_is_rejected() {
    let path = std::env::temp_dir().join(format!("drg_cli_unknown_{}.json", std::process::id()));
    std::fs::write(&path, "{ \"scenarioo\": \"highway\" }\n").unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    std::fs::remove_file(&path).ok();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("scenarioo"));
}
