//! Rule-id sequences under round robin must not drift. Set TSD_BLESS=1 to
//! rewrite the expected files after an intended change.

mod common;

use std::cell::RefCell;
use std::path::PathBuf;
use std::rc::Rc;

use tsd::machine::{Config, Outcome, RuleSink};

fn rules(name: &str) -> String {
    let mut m = common::machine(name, Config::default());
    let sink = Rc::new(RefCell::new(RuleSink::default()));
    m.set_trace(Box::new(sink.clone()));
    assert!(matches!(m.run(), Outcome::Final { .. }));
    drop(m.take_trace());
    let mut s = sink.borrow().0.join("\n");
    s.push('\n');
    s
}

fn check(name: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.rules"));
    let got = rules(name);
    if std::env::var_os("TSD_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if got != want {
        let line = got.lines().zip(want.lines()).position(|(a, b)| a != b).unwrap_or(0);
        panic!("{name}: trace differs from {} at line {}", path.display(), line + 1);
    }
}

#[test]
fn larger_trace_is_stable() {
    check("larger");
}

#[test]
fn alt_trace_is_stable() {
    check("alt");
}

#[test]
fn composite_trace_is_stable() {
    check("composite");
}

#[test]
fn sieve_trace_is_stable() {
    check("sieve");
}

#[test]
fn repeated_runs_match() {
    assert_eq!(rules("sieve"), rules("sieve"));
}
