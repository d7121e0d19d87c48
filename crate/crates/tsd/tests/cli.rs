mod common;

use std::process::{Command, Output};

use common::program_path;

fn tsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsd")).args(args).output().expect("run tsd")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn prog(name: &str) -> String {
    program_path(name).display().to_string()
}

fn scratch(name: &str, src: &str) -> String {
    let dir = std::env::temp_dir().join(format!("tsd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p.display().to_string()
}

#[test]
fn run_prints_peeks_then_the_value() {
    let o = tsd(&["run", &prog("const")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "=> 42 : Int\n");
    let o = tsd(&["run", &prog("larger")]);
    assert_eq!(stdout(&o), "1\n3\n3\n=> 3 : Int\n");
}

#[test]
fn sieve_output() {
    let o = tsd(&["run", &prog("sieve"), "--schedule", "par:3", "--validate", "commit"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines, ["3", "2", "4", "3", "5", "0", "=> 0 : Int"]);
}

#[test]
fn exit_codes() {
    assert_eq!(tsd(&["run", "/nonexistent/x.tsd"]).status.code(), Some(1));
    assert_eq!(tsd(&["run"]).status.code(), Some(1));
    assert_eq!(tsd(&["run", &prog("const"), "--schedule", "fifo"]).status.code(), Some(1));
    let bad = scratch("bad.tsd", "1 +");
    assert_eq!(tsd(&["run", &bad]).status.code(), Some(1));
    let ill = scratch("ill.tsd", "1 2");
    assert_eq!(tsd(&["run", &ill]).status.code(), Some(1));
    let loopy = scratch("loop.tsd", "(rec f. λx. f x) 0");
    assert_eq!(tsd(&["run", &loopy, "--fuel", "5000"]).status.code(), Some(3));
    assert_eq!(tsd(&["--help"]).status.code(), Some(0));
}

#[test]
fn fuel_from_environment() {
    let loopy = scratch("loop_env.tsd", "(rec f. λx. f x) 0");
    let o = Command::new(env!("CARGO_BIN_EXE_tsd")).args(["run", &loopy]).env("TSD_FUEL", "1000").output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1000 transitions"));
}

#[test]
fn step_returns_bool() {
    let p = scratch("count.tsd", "let a = ref 0 in let b = ref 0 in link a 1; link b 2; step");
    assert_eq!(stdout(&tsd(&["run", &p])), "=> 2 : Int\n");
    assert_eq!(stdout(&tsd(&["run", &p, "--step-returns-bool"])), "=> 1 : Int\n");
}

#[test]
fn trace_is_jsonl() {
    let o = tsd(&["trace", &prog("larger")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut commits = 0;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["rule_id"].is_string() && v["seq"].is_u64());
        if let Some(c) = v.get("commit") {
            commits += 1;
            assert!(c.is_array());
        }
    }
    assert_eq!(commits, 2);
}

#[test]
fn trace_to_file_and_initial_dot() {
    let dir = std::env::temp_dir().join(format!("tsd-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("t.jsonl");
    let dot = dir.join("g.dot");
    let o = tsd(&[
        "run",
        &prog("alt"),
        "--trace",
        trace.to_str().unwrap(),
        "--dump-initial-dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&trace).unwrap().lines().count() > 100);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn dot_snapshots() {
    let p = prog("larger");
    let before = stdout(&tsd(&["dot", &p, "--before-step", "1"]));
    assert!(before.contains("label=\"{0}\"") && before.contains("label=\"{1}\""), "{before}");
    let after = stdout(&tsd(&["dot", &p, "--after-steps", "1"]));
    assert!(after.contains("label=\"{2}\"") && after.contains("label=\"{3}\""), "{after}");
    let empty = scratch("empty.tsd", "// nothing here\n");
    assert_eq!(stdout(&tsd(&["dot", &empty])), "digraph tsd {\n}\n");
}

#[test]
fn lint_diff_fuzz() {
    let o = tsd(&["lint", &prog("composite")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("graph: ok"));
    let o = tsd(&["diff", &prog("sieve")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("agree\n"));
    let o = tsd(&["fuzz", "--count", "20", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("20 agree"));
}

#[test]
fn bench_table_and_csv() {
    let o = tsd(&["bench", "--shape", "tree", "--sizes", "7,15,31"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("r² ="));
    let csv = std::env::temp_dir().join(format!("tsd-bench-{}.csv", std::process::id()));
    let o = tsd(&["bench", "--shape", "chain:2", "--sizes", "10,20", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("shape,size"));
}
