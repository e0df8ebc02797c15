//! Command-line behaviour and exit codes.

use std::path::Path;
use std::process::Command;

use tetherplan::cli::{run, EXIT_INPUT, EXIT_NO_PLAN, EXIT_OK};
use tetherplan::io::{plan_header, read_plan_file};

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("tetherplan").chain(args.iter().copied()))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.csv");
    assert_eq!(cli(&["plan"]), EXIT_INPUT);
    assert_eq!(cli(&["plan", "--out", &out, "--goal-rpy", "1,2"]), EXIT_INPUT);
    assert_eq!(cli(&["plan", "--out", &out, "--seed", "-3"]), EXIT_INPUT);
    assert_eq!(cli(&["plan", "--out", &out, "--scene", "/nonexistent.toml"]), EXIT_INPUT);
    assert_eq!(cli(&["torque", "--plan-file", "/nonexistent.csv", "--out", &out]), EXIT_INPUT);
    assert_eq!(cli(&["frobnicate"]), EXIT_INPUT);
    assert_eq!(cli(&["--help"]), EXIT_OK);
}

#[test]
fn infeasible_goal_exits_with_one_and_writes_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "none.csv");
    assert_eq!(cli(&["plan", "--goal-rpy", "0,90,0", "--constrained", "--out", &out]), EXIT_NO_PLAN);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.trim_end(), plan_header().join(","));
}

#[test]
fn plan_pair_feeds_the_torque_table() {
    let dir = tempfile::tempdir().unwrap();
    let (c, u, t) = (path(dir.path(), "c.csv"), path(dir.path(), "u.csv"), path(dir.path(), "t.csv"));
    let common = ["--start-rpy", "10,0,0", "--goal-rpy", "0,15,0", "--seed", "3"];
    let plan = |mode: &str, out: &str| {
        let mut args = vec!["plan", mode, "--out", out];
        args.extend(common);
        cli(&args)
    };
    assert_eq!(plan("--constrained", &c), EXIT_OK);
    assert_eq!(plan("--unconstrained", &u), EXIT_OK);
    assert!(!read_plan_file(Path::new(&c)).unwrap().waypoints.is_empty());
    assert_eq!(cli(&["torque", "--plan-file", &c, "--plan-file", &u, "--out", &t]), EXIT_OK);
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.lines().count() > 2);
    assert_eq!(cli(&["torque", "--plan-file", &c, "--out", &t]), EXIT_OK);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tetherplan");
    let status = Command::new(bin).arg("plan").output().unwrap().status;
    assert_eq!(status.code(), Some(EXIT_INPUT));
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "none.csv");
    let run = Command::new(bin)
        .args(["plan", "--goal-rpy", "0,90,0", "--out", &out])
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(EXIT_NO_PLAN));
    assert!(String::from_utf8_lossy(&run.stdout).contains("no plan"));
}
