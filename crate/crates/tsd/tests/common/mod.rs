#![allow(dead_code)]

use std::path::PathBuf;

use tsd::machine::{run_source, Config, Machine, Outcome};

pub const PROGRAMS: [&str; 6] = ["const", "larger", "alt", "composite", "sieve", "sieve8"];

pub fn program_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs").join(format!("{name}.tsd"))
}

pub fn source(name: &str) -> String {
    std::fs::read_to_string(program_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn run(name: &str, cfg: Config) -> (Machine, Outcome) {
    run_source(&source(name), cfg).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn machine(name: &str, cfg: Config) -> Machine {
    let tr = tsd::translate::translate_program(&source(name)).unwrap();
    Machine::new(tr, cfg).unwrap()
}
