use std::path::PathBuf;
use std::process::{Command, Output};

fn semisim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semisim")).args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("semisim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn compile_then_verify_parity() {
    let net = tmp("parity.json");
    let net_s = net.to_str().unwrap();
    let o = semisim(&["compile", "parity", "--construction", "log-depth", "--T", "8", "-o", net_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(net.with_file_name("parity.report.json").exists());
    let o = semisim(&["verify", "parity", net_s, "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("PASS"));
    let o = semisim(&["simulate", net_s, "--input", "1,1,0,1"]);
    assert_eq!(stdout(&o).trim(), "1 0 0 1");
}

#[test]
fn gridworld_round_trip() {
    let net = tmp("grid.json");
    let net_s = net.to_str().unwrap();
    let o = semisim(&["compile", "gridworld(3)", "--construction", "gridworld", "--T", "12", "-o", net_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = semisim(&["verify", "gridworld(3)", net_s, "--trials", "200", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn analyze_prints_structure() {
    let o = semisim(&["analyze", "gridworld(2)"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("states: 3"));
    assert!(s.contains("aperiodic: true"));
}

#[test]
fn refusal_and_usage_errors_exit_2() {
    let net = tmp("s5.json");
    let o = semisim(&["compile", "permutation-group([[1,2,3,4,0],[1,0,2,3,4]])", "--construction", "krohn-rhodes", "--T", "4", "-o", net.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-solvable"));
    assert_eq!(semisim(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn wrong_net_fails_verification() {
    let net = tmp("c3.json");
    let net_s = net.to_str().unwrap();
    let o = semisim(&["compile", "cyclic(3)", "--construction", "counter", "--T", "6", "-o", net_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = semisim(&["verify", "memory(2)", net_s, "--trials", "50", "--q0", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}
