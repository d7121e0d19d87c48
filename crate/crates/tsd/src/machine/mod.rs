//! The token machine: pass transitions, rewrites, mode switching and the
//! driver loop.

mod pass;
mod rewrite;
pub mod trace;

use std::fmt;

use serde::Serialize;

use crate::graph::{EdgeId, End, Graph, NodeId, NodeKind};
use crate::propagation::{self, PropReport, Schedule};
use crate::syntax::Type;
use crate::translate::TranslationResult;
use crate::validity::{self, Violation};
pub use trace::{JsonlSink, RuleSink, TraceEvent, TraceSink};

pub(crate) use pass::pass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Dir {
    Up,
    Down,
}

impl Dir {
    pub fn arrow(self) -> &'static str {
        match self {
            Dir::Up => "up",
            Dir::Down => "down",
        }
    }
}

/// Provenance of an integer on the stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    /// Computed from constants only.
    Plain,
    /// Depends on some cell's stored value.
    Flow,
    /// The value is a cell; the node is the cell itself.
    CellRef(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Elem {
    Star,
    Lam,
    Int(i64, Tag),
    Unit,
    If0,
    If1,
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Star => write!(f, "*"),
            Elem::Lam => write!(f, "(λ,-)"),
            Elem::Int(n, Tag::Plain) => write!(f, "({n},-)"),
            Elem::Int(n, Tag::Flow) => write!(f, "({n},g)"),
            Elem::Int(n, Tag::CellRef(c)) => write!(f, "({n},{c})"),
            Elem::Unit => write!(f, "((),-)"),
            Elem::If0 => write!(f, "If0"),
            Elem::If1 => write!(f, "If1"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flag {
    None,
    Beta,
    If,
    Contract,
    Bang,
    Rec,
    Make,
    Peek,
    Link(NodeId),
    Assign { value: i64, cell: NodeId },
    Root(NodeId),
    StepProp,
    StepDone,
    /// `$` after an operation; `flow` means at least one operand was tagged g
    /// and the flag is cleared without rewriting.
    Fold { flow: bool },
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::None => write!(f, "none"),
            Flag::Beta => write!(f, "@"),
            Flag::If => write!(f, "if"),
            Flag::Contract => write!(f, "C"),
            Flag::Bang => write!(f, "!"),
            Flag::Rec => write!(f, "mu"),
            Flag::Make => write!(f, "m"),
            Flag::Peek => write!(f, "p"),
            Flag::Link(c) => write!(f, "l({c})"),
            Flag::Assign { value, cell } => write!(f, "a({value},{cell})"),
            Flag::Root(c) => write!(f, "r({c})"),
            Flag::StepProp => write!(f, "sp"),
            Flag::StepDone => write!(f, "s"),
            Flag::Fold { .. } => write!(f, "$"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub pos: EdgeId,
    pub dir: Dir,
    pub flag: Flag,
    pub stack: Vec<Elem>,
    pub bstack: Vec<EdgeId>,
}

impl Token {
    pub fn new(pos: EdgeId) -> Self {
        Token { pos, dir: Dir::Up, flag: Flag::None, stack: vec![Elem::Star], bstack: Vec::new() }
    }

    fn up(&mut self, e: EdgeId) {
        self.pos = e;
        self.dir = Dir::Up;
    }

    fn down(&mut self, e: EdgeId) {
        self.pos = e;
        self.dir = Dir::Down;
    }

    /// Node kind and port the token is about to interact with.
    pub fn facing(&self, g: &Graph) -> (String, String) {
        let ed = g.edge(self.pos);
        let (end, pol) = match self.dir {
            Dir::Up => (ed.hi, 'i'),
            Dir::Down => (ed.lo, 'o'),
        };
        match end {
            End::Port(n, i) if g.is_live(n) => (g.kind(n).tag().to_string(), format!("{pol}{i}")),
            End::Port(..) => ("dead".into(), String::new()),
            End::Iface(k) => ("iface".into(), format!("{k}")),
            End::Open => ("open".into(), String::new()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Construct,
    Propagate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ValidateLevel {
    #[default]
    Off,
    Commit,
    EveryStep,
}

/// Why the machine could not continue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnosis {
    pub msg: String,
    pub node_kind: String,
    pub port: String,
    pub dir: Dir,
    pub flag: String,
    /// Top of the stack first, at most four entries.
    pub stack: Vec<String>,
    /// Index of the prop token, when the stuck token was one.
    pub prop: Option<usize>,
}

impl Diagnosis {
    pub fn new(g: &Graph, t: &Token, msg: impl Into<String>) -> Self {
        let (node_kind, port) = t.facing(g);
        Diagnosis {
            msg: msg.into(),
            node_kind,
            port,
            dir: t.dir,
            flag: t.flag.to_string(),
            stack: t.stack.iter().rev().take(4).map(|e| e.to_string()).collect(),
            prop: None,
        }
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}.{} going {} with flag {}, stack [{}]",
            self.msg,
            self.node_kind,
            self.port,
            self.dir.arrow(),
            self.flag,
            self.stack.join(" : ")
        )?;
        if let Some(p) = self.prop {
            write!(f, " (prop token {p})")?;
        }
        Ok(())
    }
}

/// Observable result of a finished run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Unit,
    Fun,
    /// A cell, by creation serial.
    Cell(usize),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Unit => write!(f, "()"),
            Value::Fun => write!(f, "<fun>"),
            Value::Cell(s) => write!(f, "<cell {s}>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Final { value: Value, elem: Elem, transitions: u64 },
    Stuck { diag: Diagnosis, transitions: u64 },
    FuelExhausted { transitions: u64 },
    /// A validity check failed (only with validation switched on).
    Invalid { violations: Vec<Violation>, transitions: u64 },
}

impl Outcome {
    pub fn transitions(&self) -> u64 {
        match self {
            Outcome::Final { transitions, .. }
            | Outcome::Stuck { transitions, .. }
            | Outcome::FuelExhausted { transitions }
            | Outcome::Invalid { transitions, .. } => *transitions,
        }
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Outcome::Final { value, .. } => Some(value),
            _ => None,
        }
    }
}

pub const DEFAULT_FUEL: u64 = 10_000_000;

/// Fuel from `TSD_FUEL`, falling back to the default.
pub fn fuel_from_env() -> u64 {
    std::env::var("TSD_FUEL").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_FUEL)
}

#[derive(Clone, Debug)]
pub struct Config {
    pub fuel: u64,
    pub schedule: Schedule,
    pub validate: ValidateLevel,
    pub step_returns_bool: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            fuel: DEFAULT_FUEL,
            schedule: Schedule::RoundRobin,
            validate: ValidateLevel::Off,
            step_returns_bool: false,
        }
    }
}

/// Record of one propagation round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub report: PropReport,
    /// Main-token transitions before the round started.
    pub at_transition: u64,
}

pub struct Machine {
    pub graph: Graph,
    pub token: Token,
    pub ty: Type,
    pub config: Config,
    pub peeks: Vec<i64>,
    pub steps: Vec<StepRecord>,
    pub transitions: u64,
    /// Transitions spent by prop tokens, summed over all rounds.
    pub prop_transitions: u64,
    sink: Option<Box<dyn TraceSink>>,
    seq: u64,
    done: Option<Outcome>,
}

impl fmt::Debug for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Machine")
            .field("token", &self.token)
            .field("transitions", &self.transitions)
            .field("nodes", &self.graph.node_count())
            .finish()
    }
}

impl Clone for Machine {
    /// Deep copy without the trace sink.
    fn clone(&self) -> Self {
        Machine {
            graph: self.graph.clone(),
            token: self.token.clone(),
            ty: self.ty.clone(),
            config: self.config.clone(),
            peeks: self.peeks.clone(),
            steps: self.steps.clone(),
            transitions: self.transitions,
            prop_transitions: self.prop_transitions,
            sink: None,
            seq: self.seq,
            done: self.done.clone(),
        }
    }
}

enum Halt {
    Stuck(String),
    Done(Outcome),
}

#[derive(Debug, thiserror::Error)]
#[error("program has free variables: {0:?}")]
pub struct OpenTerm(pub Vec<String>);

impl Machine {
    pub fn new(tr: TranslationResult, config: Config) -> Result<Self, OpenTerm> {
        if !tr.free_var_ports.is_empty() {
            return Err(OpenTerm(tr.free_var_ports.keys().cloned().collect()));
        }
        Ok(Self::from_graph(tr.graph, tr.root, tr.ty, config))
    }

    /// Starts a fresh token at `root`, which must lead out of the graph
    /// through interface slot 0.
    pub fn from_graph(graph: Graph, root: EdgeId, ty: Type, config: Config) -> Self {
        Machine {
            graph,
            token: Token::new(root),
            ty,
            config,
            peeks: Vec::new(),
            steps: Vec::new(),
            transitions: 0,
            prop_transitions: 0,
            sink: None,
            seq: 0,
            done: None,
        }
    }

    pub fn set_trace(&mut self, sink: Box<dyn TraceSink>) {
        self.sink = Some(sink);
    }

    pub fn take_trace(&mut self) -> Option<Box<dyn TraceSink>> {
        self.sink.take()
    }

    pub fn is_done(&self) -> bool {
        self.done.is_some()
    }

    pub fn outcome(&self) -> Option<&Outcome> {
        self.done.as_ref()
    }

    /// The interface edge the main token must return down to.
    pub fn root_edge(&self) -> Option<EdgeId> {
        self.graph.edge_ids().find(|&e| self.graph.edge(e).lo == End::Iface(0))
    }

    /// Runs to completion.
    pub fn run(&mut self) -> Outcome {
        loop {
            if let Some(o) = self.step_once() {
                return o;
            }
        }
    }

    /// Runs until the number of peeks grows, the run ends, or `limit`
    /// transitions pass.
    pub fn run_until_peek(&mut self, limit: u64) -> Option<i64> {
        let before = self.peeks.len();
        let stop = self.transitions.saturating_add(limit);
        while self.peeks.len() == before && self.transitions < stop {
            if self.step_once().is_some() {
                break;
            }
        }
        self.peeks.get(before).copied()
    }

    /// One transition of the main token (a whole propagation round counts as
    /// one). Returns the outcome once the run has ended.
    pub fn step_once(&mut self) -> Option<Outcome> {
        if let Some(o) = &self.done {
            return Some(o.clone());
        }
        if self.transitions >= self.config.fuel {
            return self.finish(Outcome::FuelExhausted { transitions: self.transitions });
        }
        let t = &self.token;
        if t.flag == Flag::None && t.dir == Dir::Down && self.graph.edge(t.pos).lo == End::Iface(0) {
            return match t.stack.as_slice() {
                [elem] => {
                    let value = self.value_of(*elem);
                    self.finish(Outcome::Final { value, elem: *elem, transitions: self.transitions })
                }
                _ => self.stuck("returned to the interface with a malformed stack".into()),
            };
        }
        let before = self.event_prefix();
        let res = match self.token.flag {
            Flag::None => pass(&self.graph, &mut self.token).map_err(Halt::Stuck),
            Flag::StepProp => self.propagate(),
            _ => self.rewrite().map_err(Halt::Stuck),
        };
        match res {
            Ok(rule) => {
                self.transitions += 1;
                self.emit(rule, before);
                if self.config.validate == ValidateLevel::EveryStep {
                    let v = validity::check_state(&self.graph, &self.token, &[], Mode::Construct);
                    if !v.is_empty() {
                        return self.finish(Outcome::Invalid { violations: v, transitions: self.transitions });
                    }
                }
                None
            }
            Err(Halt::Stuck(msg)) => self.stuck(msg),
            Err(Halt::Done(o)) => self.finish(o),
        }
    }

    fn stuck(&mut self, msg: String) -> Option<Outcome> {
        let diag = Diagnosis::new(&self.graph, &self.token, msg);
        self.finish(Outcome::Stuck { diag, transitions: self.transitions })
    }

    fn finish(&mut self, o: Outcome) -> Option<Outcome> {
        self.done = Some(o.clone());
        Some(o)
    }

    fn value_of(&self, e: Elem) -> Value {
        match e {
            Elem::Int(_, Tag::CellRef(c)) => Value::Cell(self.graph.cell_serial(c).unwrap_or(0)),
            Elem::Int(n, _) => Value::Int(n),
            Elem::Unit => Value::Unit,
            Elem::Lam => Value::Fun,
            Elem::Star | Elem::If0 | Elem::If1 => Value::Unit,
        }
    }

    /// Node kind and port faced before a transition, for the trace.
    fn event_prefix(&self) -> Option<(String, String, Dir)> {
        self.sink.as_ref()?;
        let (k, p) = self.token.facing(&self.graph);
        Some((k, p, self.token.dir))
    }

    fn emit(&mut self, rule: &'static str, before: Option<(String, String, Dir)>) {
        let Some((node_kind, port, dir)) = before else { return };
        let ev = TraceEvent {
            seq: self.seq,
            mode: "construct",
            rule_id: rule.to_string(),
            node_kind,
            port,
            direction: dir.arrow(),
            flag: self.token.flag.to_string(),
            cstack_depth: self.token.stack.len(),
            bstack_depth: self.token.bstack.len(),
            graph_nodes: self.graph.node_count(),
            token: None,
            commit: None,
        };
        self.seq += 1;
        if let Some(s) = self.sink.as_mut() {
            s.event(ev);
        }
    }

    /// Runs every prop token to its final state, then commits.
    fn propagate(&mut self) -> Result<&'static str, Halt> {
        let mut events = self.sink.is_some().then(Vec::new);
        let check = self.config.validate == ValidateLevel::EveryStep;
        let report = match propagation::propagate(
            &self.graph,
            &self.config.schedule,
            propagation::token_fuel(&self.graph),
            events.as_mut(),
            check.then_some(&self.token),
        ) {
            Ok(r) => r,
            Err(propagation::PropError::Stuck(diag)) => {
                return Err(Halt::Done(Outcome::Stuck { diag, transitions: self.transitions }));
            }
            Err(propagation::PropError::Invalid(violations)) => {
                return Err(Halt::Done(Outcome::Invalid { violations, transitions: self.transitions }));
            }
        };
        if let Some(evs) = events {
            for mut ev in evs {
                ev.seq = self.seq;
                self.seq += 1;
                if let Some(s) = self.sink.as_mut() {
                    s.event(ev);
                }
            }
        }
        self.prop_transitions += report.transitions_per_token.iter().sum::<u64>();
        let count = propagation::commit(&mut self.graph, &report);
        let n = if self.config.step_returns_bool { i64::from(count > 0) } else { count as i64 };
        if let Some(s) = self.sink.as_mut() {
            s.event(TraceEvent::commit(self.seq, &self.graph, &report));
            self.seq += 1;
        }
        self.steps.push(StepRecord { report, at_transition: self.transitions });
        match self.token.stack.last_mut() {
            Some(top @ Elem::Star) => *top = Elem::Int(n, Tag::Plain),
            _ => return Err(Halt::Stuck("step reached without * on the stack".into())),
        }
        self.token.dir = Dir::Down;
        self.token.flag = Flag::StepDone;
        if self.config.validate != ValidateLevel::Off {
            let violations = validity::check_graph(&self.graph);
            if !violations.is_empty() {
                return Err(Halt::Done(Outcome::Invalid { violations, transitions: self.transitions }));
            }
        }
        Ok("commit")
    }

    /// Snapshot of cell values in creation order.
    pub fn cell_values(&self) -> Vec<i64> {
        self.graph.cell_values()
    }

    /// Cell values recorded after each propagation round.
    pub fn cell_history(&self) -> Vec<Vec<i64>> {
        self.steps.iter().map(|s| s.report.cells.iter().map(|c| c.new).collect()).collect()
    }

    /// A fresh machine on a copy of the current graph, with the token back
    /// at the root and no history.
    pub fn restart(&self) -> Option<Machine> {
        let root = self.root_edge()?;
        Some(Machine::from_graph(self.graph.clone(), root, self.ty.clone(), self.config.clone()))
    }

    pub fn node_kind_at(&self, n: NodeId) -> &NodeKind {
        self.graph.kind(n)
    }
}

/// Convenience: parse, translate and run a closed program.
pub fn run_source(src: &str, config: Config) -> Result<(Machine, Outcome), crate::Error> {
    let tr = crate::translate::translate_program(src)?;
    let mut m = Machine::new(tr, config)?;
    let o = m.run();
    Ok((m, o))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> (Machine, Outcome) {
        let cfg = Config { fuel: 200_000, validate: ValidateLevel::EveryStep, ..Config::default() };
        run_source(src, cfg).unwrap()
    }

    fn value(src: &str) -> Value {
        let (_, o) = run(src);
        match o {
            Outcome::Final { value, .. } => value,
            other => panic!("{src}: {other:?}"),
        }
    }

    #[test]
    fn constants_and_arithmetic() {
        assert_eq!(value("42"), Value::Int(42));
        assert_eq!(value("1 + 2 * 3"), Value::Int(7));
        assert_eq!(value("10 - 3 - 2"), Value::Int(5));
        assert_eq!(value("7 / 0"), Value::Int(0));
        assert_eq!(value("()"), Value::Unit);
    }

    #[test]
    fn identity_application_rules() {
        let tr = crate::translate::translate_program("(λx.x) 5").unwrap();
        let mut m = Machine::new(tr, Config::default()).unwrap();
        let sink = std::rc::Rc::new(std::cell::RefCell::new(trace::RuleSink::default()));
        m.set_trace(Box::new(sink.clone()));
        assert_eq!(m.run().value(), Some(&Value::Int(5)));
        let rules = sink.borrow().0.join(" ");
        assert_eq!(
            rules,
            "pass.app.i0.up pass.bang.i0.up rw.X! pass.const.i0.up pass.bang.o0.down \
             pass.app.o1.down pass.bang.i0.up rw.X! pass.lam.i1.up pass.bang.o0.down \
             pass.app.o0.down rw.beta pass.bang.i0.up rw.X! pass.const.i0.up pass.bang.o0.down"
        );
        assert!(m.graph.well_formed().is_empty());
    }

    #[test]
    fn functions() {
        assert_eq!(value("(λx.x) 5"), Value::Int(5));
        assert_eq!(value("(λx.x + x) 5"), Value::Int(10));
        assert_eq!(value("(λf.λx.f (f x)) (λy.y * 3) 2"), Value::Int(18));
        assert_eq!(value("(λx.1) 9"), Value::Int(1));
        assert_eq!(value("λx.x"), Value::Fun);
        assert_eq!(value("(+) 1 2"), Value::Int(3));
        assert_eq!(value("let add = (+) in add 4 5 + add 1 1"), Value::Int(11));
    }

    #[test]
    fn conditionals() {
        assert_eq!(value("if 0 then 1 else 2"), Value::Int(2));
        assert_eq!(value("if 3 then 1 else 2"), Value::Int(1));
        assert_eq!(value("let x = ref 0 in if deref x then 1 else 2"), Value::Int(2));
        assert_eq!(value("let x = ref 5 in if deref x then 1 else 2"), Value::Int(1));
    }

    #[test]
    fn recursion() {
        assert_eq!(value("(rec f. λn. if n then n + f (n - 1) else 0) 4"), Value::Int(10));
        let (_, o) = run("(rec f. λx. f x) 1");
        assert!(matches!(o, Outcome::FuelExhausted { .. }), "{o:?}");
    }

    #[test]
    fn cells_and_steps() {
        assert_eq!(value("let x = ref 1 in deref x"), Value::Int(1));
        assert_eq!(value("let x = ref 1 in assign x 4; deref x"), Value::Int(4));
        assert_eq!(value("let x = ref 1 in link x (1 - deref x); step; deref x"), Value::Int(0));
        assert_eq!(value("let c = ref 1 in step"), Value::Int(0));
        assert_eq!(value("let x = ref 1 in link x (deref x + 1); step; step; peek (deref x)"), Value::Int(3));
    }

    #[test]
    fn larger_of_two_cells() {
        let src = "let x = ref 0 in let y = ref 1 in link x 2; link y 3;
            let out = if deref y <= deref x then deref x else deref y in
            peek out; step; peek out; step; peek out";
        let (m, o) = run(src);
        assert!(matches!(o, Outcome::Final { .. }), "{o:?}");
        assert_eq!(m.peeks, vec![1, 3, 3]);
    }
}

