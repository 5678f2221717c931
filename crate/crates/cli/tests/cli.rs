use std::path::Path;
use std::process::{Command, Output};

use uavdql_core::metrics::read_trace_csv;
use uavdql_core::Scenario;

fn uavdql(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavdql"))
        .args(args)
        .current_dir(dir)
        .env_clear()
        .output()
        .expect("spawn uavdql")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(&uavdql(
        &["generate", "--seed", "9", "--nodes", "5"],
        dir.path(),
    ));
    let b = ok(&uavdql(
        &["generate", "--seed", "9", "--nodes", "5"],
        dir.path(),
    ));
    assert_eq!(a, b);
    let s = Scenario::parse(&a, "stdout").unwrap();
    assert_eq!(s.node_count(), 5);
    assert_eq!(s.to_text(), a);
}

#[test]
fn too_many_nodes_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavdql(&["generate", "--nodes", "40"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(uavdql(&["train"], dir.path()).status.code(), Some(2));
    assert_eq!(
        uavdql(
            &["train", "--scenario", "s.txt", "--weights", "x"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn train_then_evaluate_reproduces_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&uavdql(&["generate", "--seed", "3", "--out", "s.txt"], d));
    ok(&uavdql(
        &[
            "train",
            "--scenario",
            "s.txt",
            "--seed",
            "1",
            "--episodes",
            "2000",
            "--eps-full-until",
            "200",
            "--eps-zero-at",
            "1600",
            "--smooth",
            "50",
        ],
        d,
    ));
    for f in ["curve.csv", "qtables.txt", "trace.csv", "delays.csv"] {
        assert!(d.join("out").join(f).is_file(), "{f} missing");
    }
    let curve = std::fs::read_to_string(d.join("out/curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 2001);
    ok(&uavdql(
        &[
            "evaluate",
            "--scenario",
            "s.txt",
            "--tables",
            "out/qtables.txt",
            "--out",
            "eval",
        ],
        d,
    ));
    let trained = read_trace_csv(std::fs::File::open(d.join("out/trace.csv")).unwrap()).unwrap();
    let evaluated = read_trace_csv(std::fs::File::open(d.join("eval/trace.csv")).unwrap()).unwrap();
    assert_eq!(trained, evaluated);
    assert_eq!(trained.len(), 6);
}

#[test]
fn oracle_methods_agree_and_compare_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&uavdql(&["generate", "--seed", "4", "--out", "s.txt"], d));
    let dp = ok(&uavdql(&["oracle", "--scenario", "s.txt"], d));
    let perm = ok(&uavdql(
        &["oracle", "--scenario", "s.txt", "--method", "permutation"],
        d,
    ));
    let order = |s: &str| s.lines().find(|l| l.contains("order")).map(str::to_owned);
    assert!(order(&dp).is_some());
    assert_eq!(order(&dp), order(&perm));
    ok(&uavdql(
        &[
            "compare",
            "--scenario",
            "s.txt",
            "--presets",
            "default,dql3",
            "--episodes",
            "500",
            "--out",
            "cmp",
        ],
        d,
    ));
    let csv = std::fs::read_to_string(d.join("cmp/compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn config_file_and_env_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&uavdql(
        &["generate", "--seed", "5", "--nodes", "3", "--out", "s.txt"],
        d,
    ));
    std::fs::write(
        d.join("run.toml"),
        "[hyper]\nepisodes = 10\neps_full_until = 2\neps_zero_at = 8\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_uavdql"))
        .args(["train", "--scenario", "s.txt", "--config", "run.toml"])
        .env_clear()
        .env("UAVDQL_OUT", "viaenv")
        .current_dir(d)
        .output()
        .unwrap();
    ok(&out);
    let curve = std::fs::read_to_string(d.join("viaenv/curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 11);
    std::fs::write(d.join("bad.toml"), "[hyper]\nepisodez = 1\n").unwrap();
    let bad = uavdql(&["train", "--scenario", "s.txt", "--config", "bad.toml"], d);
    assert_eq!(bad.status.code(), Some(3));
}
