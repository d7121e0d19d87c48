use crate::machine::{Config, Machine, Outcome, Value};
use crate::syntax::{Term, TypeEnv};
use crate::translate::translate;

use super::{oracle_eval, OracleConfig, OracleError, OracleRun};

/// What one side produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observation {
    Done { value: Value, peeks: Vec<i64>, steps: Vec<(usize, Vec<i64>)> },
    OutOfFuel,
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct Agreement {
    pub machine: Observation,
    pub oracle: Observation,
    /// Empty when the two sides agree.
    pub mismatches: Vec<String>,
    /// Set when a side ran out of fuel, so nothing could be compared.
    pub inconclusive: bool,
}

impl Agreement {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn from_oracle(r: Result<OracleRun, OracleError>) -> Observation {
    match r {
        Ok(r) => Observation::Done {
            value: r.value,
            peeks: r.peeks,
            steps: r.steps.into_iter().map(|s| (s.count, s.cells)).collect(),
        },
        Err(OracleError::Fuel | OracleError::Depth) => Observation::OutOfFuel,
        Err(e) => Observation::Failed(e.to_string()),
    }
}

fn from_machine(m: &Machine, o: &Outcome) -> Observation {
    match o {
        Outcome::Final { value, .. } => Observation::Done {
            value: value.clone(),
            peeks: m.peeks.clone(),
            steps: m
                .steps
                .iter()
                .map(|s| (s.report.updated_count, s.report.cells.iter().map(|c| c.new).collect()))
                .collect(),
        },
        Outcome::FuelExhausted { .. } => Observation::OutOfFuel,
        Outcome::Stuck { diag, .. } => Observation::Failed(format!("stuck: {}", diag.msg)),
        Outcome::Invalid { violations, .. } => {
            Observation::Failed(format!("invalid: {}", violations.first().map(|v| v.clause).unwrap_or("?")))
        }
    }
}

/// Runs a closed term on both the token machine and the reference
/// interpreter and compares final values, peeks and every step's cell
/// valuation.
pub fn differential_check(term: &Term, config: &Config) -> Agreement {
    let oracle = from_oracle(oracle_eval(
        term,
        &OracleConfig { fuel: config.fuel, step_returns_bool: config.step_returns_bool },
    ));
    let machine = match translate(term, &TypeEnv::new()) {
        Err(e) => Observation::Failed(e.to_string()),
        Ok(tr) => match Machine::new(tr, config.clone()) {
            Err(e) => Observation::Failed(e.to_string()),
            Ok(mut m) => {
                let o = m.run();
                from_machine(&m, &o)
            }
        },
    };
    let mut mismatches = Vec::new();
    let mut inconclusive = false;
    match (&machine, &oracle) {
        (Observation::OutOfFuel, _) | (_, Observation::OutOfFuel) => inconclusive = true,
        (Observation::Failed(e), _) => mismatches.push(format!("machine failed: {e}")),
        (_, Observation::Failed(e)) => mismatches.push(format!("oracle failed: {e}")),
        (
            Observation::Done { value: mv, peeks: mp, steps: ms },
            Observation::Done { value: ov, peeks: op, steps: os },
        ) => {
            if mv != ov {
                mismatches.push(format!("final value: machine {mv}, oracle {ov}"));
            }
            if mp != op {
                mismatches.push(format!("peeks: machine {mp:?}, oracle {op:?}"));
            }
            if ms.len() != os.len() {
                mismatches.push(format!("step count: machine {}, oracle {}", ms.len(), os.len()));
            }
            for (i, (a, b)) in ms.iter().zip(os).enumerate() {
                if a != b {
                    mismatches.push(format!("step {}: machine {a:?}, oracle {b:?}", i + 1));
                }
            }
        }
    }
    Agreement { machine, oracle, mismatches, inconclusive }
}
