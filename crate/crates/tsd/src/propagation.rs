//! Step propagation: one read-only token per cell, any interleaving, then a
//! single atomic commit.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeId, End, Graph, NodeId};
use crate::machine::{pass, Diagnosis, Dir, Elem, Flag, Mode, Token, TraceEvent};
use crate::validity::{self, Violation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    RoundRobin,
    Random(u64),
    Concurrent(usize),
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "rr" => Ok(Schedule::RoundRobin),
            Some(("rand", seed)) => seed.parse().map(Schedule::Random).map_err(|e| format!("bad seed: {e}")),
            Some(("par", k)) => match k.parse() {
                Ok(0) | Err(_) => Err(format!("bad worker count {k:?}")),
                Ok(k) => Ok(Schedule::Concurrent(k)),
            },
            _ => Err(format!("unknown schedule {s:?} (expected rr, rand:SEED or par:K)")),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::RoundRobin => write!(f, "rr"),
            Schedule::Random(s) => write!(f, "rand:{s}"),
            Schedule::Concurrent(k) => write!(f, "par:{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellUpdate {
    pub cell: NodeId,
    pub serial: usize,
    pub old: i64,
    pub new: i64,
    pub changed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PropReport {
    pub cells: Vec<CellUpdate>,
    pub updated_count: usize,
    pub transitions_per_token: Vec<u64>,
}

#[derive(Debug)]
pub enum PropError {
    Stuck(Diagnosis),
    Invalid(Vec<Violation>),
}

/// Per-token transition budget. Propagation always terminates, so running
/// out means something is broken.
pub fn token_fuel(g: &Graph) -> u64 {
    (10 * g.node_count() as u64).max(1_000_000)
}

/// One upward token on each cell's dependency edge.
pub fn init_tokens(g: &Graph) -> Vec<(NodeId, usize, Token)> {
    g.cells_by_serial().map(|(s, c)| (c, s, Token::new(g.out_edge(c, 0)))).collect()
}

enum PStep {
    Moved(&'static str),
    Final(i64),
}

fn prop_step(g: &Graph, t: &mut Token, start: EdgeId) -> Result<PStep, String> {
    if t.flag == Flag::None && t.dir == Dir::Down && t.pos == start && t.bstack.is_empty() {
        return match t.stack.as_slice() {
            [Elem::Int(n, _)] => Ok(PStep::Final(*n)),
            _ => Err("returned to its cell without a single integer".into()),
        };
    }
    let rule = match t.flag {
        Flag::None => pass(g, t)?,
        Flag::Contract => {
            t.flag = Flag::None;
            "rw.C.reset"
        }
        Flag::Bang => {
            let bang = g.below(t.pos).ok_or("bang flag away from a box")?;
            if let End::Port(c, _) = g.edge(g.in_edge(bang, 0)).lo {
                if g.kind(c).is_contraction() {
                    return Err("shared box reached during propagation".into());
                }
            }
            t.flag = Flag::None;
            "rw.X!"
        }
        Flag::Fold { flow: true } => {
            t.flag = Flag::None;
            "flow.$.reset"
        }
        Flag::Fold { flow: false } => return Err("operation on constants only reached during propagation".into()),
        f => return Err(format!("rewrite {f} requested during propagation")),
    };
    Ok(PStep::Moved(rule))
}

struct Run<'a> {
    g: &'a Graph,
    fuel: u64,
    main: Option<&'a Token>,
}

struct Active {
    idx: usize,
    start: EdgeId,
    token: Token,
    steps: u64,
    result: Option<i64>,
}

impl Run<'_> {
    /// Advances one token by one transition.
    fn advance(&self, a: &mut Active, events: Option<&mut Vec<TraceEvent>>) -> Result<(), PropError> {
        if a.steps >= self.fuel {
            let mut d = Diagnosis::new(self.g, &a.token, "prop token ran out of fuel");
            d.prop = Some(a.idx);
            return Err(PropError::Stuck(d));
        }
        let before = events.is_some().then(|| (a.token.facing(self.g), a.token.dir));
        match prop_step(self.g, &mut a.token, a.start) {
            Ok(PStep::Final(n)) => {
                a.result = Some(n);
                Ok(())
            }
            Ok(PStep::Moved(rule)) => {
                a.steps += 1;
                if let (Some(evs), Some(((node_kind, port), dir))) = (events, before) {
                    evs.push(TraceEvent {
                        seq: 0,
                        mode: "propagate",
                        rule_id: rule.to_string(),
                        node_kind,
                        port,
                        direction: dir.arrow(),
                        flag: a.token.flag.to_string(),
                        cstack_depth: a.token.stack.len(),
                        bstack_depth: a.token.bstack.len(),
                        graph_nodes: self.g.node_count(),
                        token: Some(a.idx),
                        commit: None,
                    });
                }
                if let Some(main) = self.main {
                    let v = validity::check_state(self.g, main, std::slice::from_ref(&a.token), Mode::Propagate);
                    if !v.is_empty() {
                        return Err(PropError::Invalid(v));
                    }
                }
                Ok(())
            }
            Err(msg) => {
                let mut d = Diagnosis::new(self.g, &a.token, msg);
                d.prop = Some(a.idx);
                Err(PropError::Stuck(d))
            }
        }
    }

    fn to_end(&self, a: &mut Active, mut events: Option<&mut Vec<TraceEvent>>) -> Result<(), PropError> {
        while a.result.is_none() {
            self.advance(a, events.as_deref_mut())?;
        }
        Ok(())
    }
}

/// Runs all prop tokens to their final states without touching the graph.
/// `main`, when given, enables a validity check after every transition.
pub fn propagate(
    g: &Graph,
    schedule: &Schedule,
    fuel: u64,
    mut events: Option<&mut Vec<TraceEvent>>,
    main: Option<&Token>,
) -> Result<PropReport, PropError> {
    let tokens = init_tokens(g);
    let run = Run { g, fuel, main };
    let mut active: Vec<Active> = tokens
        .iter()
        .enumerate()
        .map(|(idx, (_, _, t))| Active { idx, start: t.pos, token: t.clone(), steps: 0, result: None })
        .collect();
    match schedule {
        Schedule::RoundRobin => loop {
            let mut any = false;
            for a in active.iter_mut().filter(|a| a.result.is_none()) {
                any = true;
                run.advance(a, events.as_deref_mut())?;
            }
            if !any {
                break;
            }
        },
        Schedule::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut open: Vec<usize> = (0..active.len()).collect();
            while !open.is_empty() {
                let k = rng.gen_range(0..open.len());
                let a = &mut active[open[k]];
                run.advance(a, events.as_deref_mut())?;
                if a.result.is_some() {
                    open.swap_remove(k);
                }
            }
        }
        Schedule::Concurrent(k) => {
            let k = (*k).max(1);
            let mut shards: Vec<Vec<&mut Active>> = (0..k).map(|_| Vec::new()).collect();
            for (i, a) in active.iter_mut().enumerate() {
                shards[i % k].push(a);
            }
            let want = events.is_some();
            let results: Vec<Result<Vec<TraceEvent>, PropError>> = std::thread::scope(|s| {
                let run = &run;
                let handles: Vec<_> = shards
                    .into_iter()
                    .map(|shard| {
                        s.spawn(move || {
                            let mut evs = Vec::new();
                            for a in shard {
                                run.to_end(a, want.then_some(&mut evs))?;
                            }
                            Ok(evs)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("propagation worker panicked")).collect()
            });
            let mut all = Vec::new();
            for r in results {
                all.extend(r?);
            }
            if let Some(evs) = events.as_mut() {
                all.sort_by_key(|e| e.token);
                evs.extend(all);
            }
        }
    }
    let mut report = PropReport::default();
    for ((cell, serial, _), a) in tokens.iter().zip(&active) {
        let old = g.cell_value(*cell).unwrap_or(0);
        let new = a.result.expect("every token finished");
        report.cells.push(CellUpdate { cell: *cell, serial: *serial, old, new, changed: old != new });
        report.transitions_per_token.push(a.steps);
    }
    report.updated_count = report.cells.iter().filter(|c| c.changed).count();
    Ok(report)
}

/// Writes every changed cell at once; returns how many changed.
pub fn commit(g: &mut Graph, report: &PropReport) -> usize {
    for c in report.cells.iter().filter(|c| c.changed) {
        g.set_cell_value(c.cell, c.new);
    }
    report.updated_count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_schedules() {
        assert_eq!("rr".parse::<Schedule>(), Ok(Schedule::RoundRobin));
        assert_eq!("rand:7".parse::<Schedule>(), Ok(Schedule::Random(7)));
        assert_eq!("par:4".parse::<Schedule>(), Ok(Schedule::Concurrent(4)));
        assert!("par:0".parse::<Schedule>().is_err());
        assert!("fifo".parse::<Schedule>().is_err());
    }

    #[test]
    fn no_cells_no_tokens() {
        let g = Graph::new();
        let r = propagate(&g, &Schedule::RoundRobin, 10, None, None).unwrap();
        assert_eq!(r, PropReport::default());
    }
}
