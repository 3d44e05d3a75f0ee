use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn drsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drsim")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = drsim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_identical_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let summary = dir.path().join("summary.json");
    let s1 = ok(&["run", "--policy", "random", "--episodes", "3", "--seed", "7", "--out", path(&a)]);
    let s2 = ok(&[
        "run", "--policy", "random", "--episodes", "3", "--seed", "7", "--out", path(&b), "--summary", path(&summary),
        "--serial",
    ]);
    assert_eq!(s1, s2);
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    assert_eq!(ta.iter().filter(|&&c| c == b'\n').count(), 72);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
    assert_eq!(v["episodes"], 3);
    assert_eq!(v["first_seed"], 7);
    assert_eq!(v["policy"], "random");
}

#[test]
fn nocredit_summary_has_zero_utilization() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["run", "--episodes", "2"])).unwrap();
    assert_eq!(v["budget_utilization"], 0.0);
    assert_eq!(v["policy"], "nocredit");
}

#[test]
fn validate_market_reports_json() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["validate-market", "--steps", "2000"])).unwrap();
    assert_eq!(v["n_steps"], 2000);
    assert_eq!(v["hourly_price_medians"].as_array().unwrap().len(), 24);
    assert!(v["lag1_autocorr"].as_f64().unwrap() > 0.5);
    let out = drsim(&["validate-market", "--steps", "10"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("1000"));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("frontier.csv");
    ok(&["sweep-credit", "--episodes", "3", "--out", path(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("credit_level,"));
    assert!(lines[6].starts_with("0.1,"));
    let custom = ok(&["sweep-credit", "--episodes", "2", "--levels", "0,0.05"]);
    assert_eq!(custom.lines().count(), 3);
    assert!(!drsim(&["sweep-credit", "--levels", "0.5"]).status.success());
}

#[test]
fn env_server_over_stdio() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_drsim"))
        .args(["env-server", "--seed", "3"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let stdin = child.stdin.as_mut().unwrap();
        writeln!(stdin, "{{\"cmd\":\"spec\"}}").unwrap();
        writeln!(stdin, "{{\"cmd\":\"step\",\"action\":0.1}}").unwrap();
        writeln!(stdin, "{{\"cmd\":\"reset\"}}").unwrap();
        writeln!(stdin, "{{\"cmd\":\"step\",\"action\":0.2}}").unwrap();
        writeln!(stdin, "{{\"cmd\":\"close\"}}").unwrap();
    }
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let replies: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(replies.len(), 5);
    assert_eq!(replies[0]["action_space"]["high"][0], 0.1);
    assert!(replies[1]["error"].is_string());
    assert_eq!(replies[2]["info"]["seed"], 3);
    assert_eq!(replies[3]["info"]["credit_effective"], 0.1);
    assert_eq!(replies[4]["ok"], true);
}

#[test]
fn preset_round_trips_through_config_file() {
    assert_eq!(ok(&["preset"]).lines().collect::<Vec<_>>(), ["default", "uri_analog", "portfolio500"]);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("uri.toml");
    std::fs::write(&file, ok(&["preset", "uri_analog"])).unwrap();
    let from_file = ok(&["run", "--config", path(&file), "--seed", "1"]);
    let from_preset = ok(&["run", "--preset", "uri-analog", "--seed", "1"]);
    assert_eq!(from_file, from_preset);
}

#[test]
fn bad_configuration_names_the_field() {
    let out = drsim(&["run", "--set", "price.rho=1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("price.rho"));
    let out = drsim(&["run", "--set", "price.nope=1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("price.nope"));
}
