//! Reference semantics: a call-by-value big-step interpreter whose integers
//! are dependency expressions over a store of cells. Shares only the
//! abstract syntax with the token machine.

mod diff;
pub mod gen;

use std::rc::Rc;

use crate::machine::Value;
use crate::syntax::{BinOp, Prim, Term};

pub use diff::{differential_check, Agreement, Observation};

/// Integer dependency: what a cell recomputes on each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(i64),
    Read(Rc<CellExpr>),
    Op(BinOp, Rc<Expr>, Rc<Expr>),
    Select(Rc<Expr>, Rc<Expr>, Rc<Expr>),
}

/// A cell, possibly chosen by a condition that is only known per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellExpr {
    Id(usize),
    Select(Rc<Expr>, Rc<CellExpr>, Rc<CellExpr>),
}

#[derive(Clone, Debug)]
enum Env {
    Nil,
    Bind(String, Val, Rc<Env>),
}

fn lookup(env: &Rc<Env>, x: &str) -> Option<Val> {
    let mut e = env;
    while let Env::Bind(y, v, rest) = &**e {
        if y == x {
            return Some(v.clone());
        }
        e = rest;
    }
    None
}

#[derive(Clone, Debug)]
enum Closure {
    Lam { x: String, body: Rc<Term>, env: Rc<Env> },
    Rec { f: String, x: String, body: Rc<Term>, env: Rc<Env> },
    Prim { p: Prim, args: Vec<Val> },
}

/// Integers and cells carry what they are now, fixed when evaluated, and
/// what they stand for on later steps.
#[derive(Clone, Debug)]
enum Val {
    Int(i64, Rc<Expr>),
    Unit,
    Cell(usize, Rc<CellExpr>),
    Fun(Rc<Closure>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepObs {
    pub count: usize,
    /// Cell values after the commit, by creation order.
    pub cells: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleRun {
    pub value: Value,
    pub peeks: Vec<i64>,
    pub steps: Vec<StepObs>,
    pub cells: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("out of fuel")]
    Fuel,
    #[error("evaluation nested too deeply")]
    Depth,
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("ill-typed: {0}")]
    Type(&'static str),
}

struct Cell {
    value: i64,
    dep: Rc<Expr>,
}

struct Interp {
    cells: Vec<Cell>,
    peeks: Vec<i64>,
    steps: Vec<StepObs>,
    fuel: u64,
    depth: usize,
    step_returns_bool: bool,
}

const MAX_DEPTH: usize = 2_000;

fn arith(op: BinOp, m: i64, n: i64) -> i64 {
    let b = |c: bool| i64::from(c);
    match op {
        BinOp::Add => m.wrapping_add(n),
        BinOp::Sub => m.wrapping_sub(n),
        BinOp::Mul => m.wrapping_mul(n),
        BinOp::Div => m.checked_div(n).unwrap_or(0),
        BinOp::Mod => m.checked_rem(n).unwrap_or(0),
        BinOp::Eq => b(m == n),
        BinOp::Ne => b(m != n),
        BinOp::Le => b(m <= n),
        BinOp::Lt => b(m < n),
        BinOp::And => b(m != 0 && n != 0),
        BinOp::Or => b(m != 0 || n != 0),
    }
}

fn as_int(v: Val) -> Result<(i64, Rc<Expr>), OracleError> {
    match v {
        Val::Int(n, e) => Ok((n, e)),
        _ => Err(OracleError::Type("expected an integer")),
    }
}

fn as_cell(v: Val) -> Result<(usize, Rc<CellExpr>), OracleError> {
    match v {
        Val::Cell(i, c) => Ok((i, c)),
        _ => Err(OracleError::Type("expected a cell")),
    }
}

fn saturated(t: &Term) -> bool {
    match t.spine() {
        (Term::Op(p), args) => p.arity() > 0 && args.len() == p.arity(),
        _ => false,
    }
}

fn konst(n: i64) -> Val {
    Val::Int(n, Rc::new(Expr::Const(n)))
}

impl Interp {
    fn read(&self, e: &Expr) -> i64 {
        match e {
            Expr::Const(n) => *n,
            Expr::Read(c) => self.cells[self.resolve(c)].value,
            Expr::Op(op, l, r) => arith(*op, self.read(l), self.read(r)),
            Expr::Select(c, t, f) => {
                if self.read(c) != 0 {
                    self.read(t)
                } else {
                    self.read(f)
                }
            }
        }
    }

    fn resolve(&self, c: &CellExpr) -> usize {
        match c {
            CellExpr::Id(i) => *i,
            CellExpr::Select(k, t, f) => {
                if self.read(k) != 0 {
                    self.resolve(t)
                } else {
                    self.resolve(f)
                }
            }
        }
    }

    fn refresh(&self, v: Val) -> Val {
        match v {
            Val::Int(_, e) => Val::Int(self.read(&e), e),
            Val::Cell(_, c) => Val::Cell(self.resolve(&c), c),
            v => v,
        }
    }

    fn tick(&mut self) -> Result<(), OracleError> {
        if self.fuel == 0 {
            return Err(OracleError::Fuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, t: &Term, env: &Rc<Env>) -> Result<Val, OracleError> {
        self.tick()?;
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth -= 1;
            return Err(OracleError::Depth);
        }
        let r = self.eval_inner(t, env);
        self.depth -= 1;
        r
    }

    fn eval_inner(&mut self, t: &Term, env: &Rc<Env>) -> Result<Val, OracleError> {
        match t {
            // a variable stands for its dependency graph, read afresh at each use
            Term::Var(x) => Ok(self.refresh(lookup(env, x).ok_or_else(|| OracleError::Unbound(x.clone()))?)),
            Term::Int(n) => Ok(konst(*n)),
            Term::Unit => Ok(Val::Unit),
            Term::Lam(x, _, b) => {
                Ok(Val::Fun(Rc::new(Closure::Lam { x: x.clone(), body: Rc::new((**b).clone()), env: env.clone() })))
            }
            Term::Rec(f, _, b) => match &**b {
                Term::Lam(x, _, body) => Ok(Val::Fun(Rc::new(Closure::Rec {
                    f: f.clone(),
                    x: x.clone(),
                    body: Rc::new((**body).clone()),
                    env: env.clone(),
                }))),
                _ => Err(OracleError::Type("rec without a function body")),
            },
            Term::Op(p) if p.arity() == 0 => self.prim(*p, &[]),
            Term::Op(p) => Ok(Val::Fun(Rc::new(Closure::Prim { p: *p, args: Vec::new() }))),
            Term::App(..) if saturated(t) => {
                // operands right to left, each value fixed as it is computed
                let (head, args) = t.spine();
                let Term::Op(p) = head else { unreachable!() };
                let mut vals = Vec::with_capacity(args.len());
                for a in args.iter().rev() {
                    vals.push(self.eval(a, env)?);
                }
                vals.reverse();
                self.prim(*p, &vals)
            }
            Term::App(f, a) => {
                // the argument is evaluated before the function
                let av = self.eval(a, env)?;
                let fv = self.eval(f, env)?;
                self.apply(fv, av)
            }
            Term::If(c, th, el) => {
                let (now, cv) = as_int(self.eval(c, env)?)?;
                match &*cv {
                    Expr::Const(_) => {
                        if now != 0 {
                            self.eval(th, env)
                        } else {
                            self.eval(el, env)
                        }
                    }
                    _ => {
                        let ev = self.eval(el, env)?;
                        let tv = self.eval(th, env)?;
                        match (tv, ev) {
                            (Val::Int(m, x), Val::Int(n, y)) => {
                                Ok(Val::Int(if now != 0 { m } else { n }, Rc::new(Expr::Select(cv, x, y))))
                            }
                            (Val::Cell(m, x), Val::Cell(n, y)) => {
                                Ok(Val::Cell(if now != 0 { m } else { n }, Rc::new(CellExpr::Select(cv, x, y))))
                            }
                            (Val::Unit, Val::Unit) => Ok(Val::Unit),
                            _ => Err(OracleError::Type("conditional branches must be ground")),
                        }
                    }
                }
            }
        }
    }

    fn apply(&mut self, f: Val, a: Val) -> Result<Val, OracleError> {
        let Val::Fun(clo) = f else {
            return Err(OracleError::Type("applying a non-function"));
        };
        match &*clo {
            Closure::Lam { x, body, env } => {
                let env = Rc::new(Env::Bind(x.clone(), a, env.clone()));
                self.eval(body, &env)
            }
            Closure::Rec { f, x, body, env } => {
                let env = Rc::new(Env::Bind(f.clone(), Val::Fun(clo.clone()), env.clone()));
                let env = Rc::new(Env::Bind(x.clone(), a, env));
                self.eval(body, &env)
            }
            Closure::Prim { p, args } => {
                let mut args = args.clone();
                args.push(a);
                if args.len() == p.arity() {
                    // the arguments went through variables, so they are read
                    // now rather than when they were supplied
                    let args: Vec<Val> = args.into_iter().map(|v| self.refresh(v)).collect();
                    self.prim(*p, &args)
                } else {
                    Ok(Val::Fun(Rc::new(Closure::Prim { p: *p, args })))
                }
            }
        }
    }

    fn prim(&mut self, p: Prim, args: &[Val]) -> Result<Val, OracleError> {
        match p {
            Prim::Bin(op) => {
                let (m, l) = as_int(args[0].clone())?;
                let (n, r) = as_int(args[1].clone())?;
                let now = arith(op, m, n);
                Ok(match (&*l, &*r) {
                    (Expr::Const(_), Expr::Const(_)) => konst(now),
                    _ => Val::Int(now, Rc::new(Expr::Op(op, l, r))),
                })
            }
            Prim::Ref => {
                let (value, dep) = as_int(args[0].clone())?;
                self.cells.push(Cell { value, dep });
                let i = self.cells.len() - 1;
                Ok(Val::Cell(i, Rc::new(CellExpr::Id(i))))
            }
            Prim::Deref => {
                let (i, c) = as_cell(args[0].clone())?;
                Ok(Val::Int(self.cells[i].value, Rc::new(Expr::Read(c))))
            }
            Prim::Root => {
                let (i, _) = as_cell(args[0].clone())?;
                let dep = self.cells[i].dep.clone();
                Ok(Val::Int(self.read(&dep), dep))
            }
            Prim::Peek => {
                let (n, _) = as_int(args[0].clone())?;
                self.peeks.push(n);
                Ok(konst(n))
            }
            Prim::Link => {
                let (i, _) = as_cell(args[0].clone())?;
                self.cells[i].dep = as_int(args[1].clone())?.1;
                Ok(Val::Unit)
            }
            Prim::Assign => {
                let (i, _) = as_cell(args[0].clone())?;
                self.cells[i].value = as_int(args[1].clone())?.0;
                Ok(Val::Unit)
            }
            Prim::Step => {
                let fresh: Vec<i64> = self.cells.iter().map(|c| self.read(&c.dep)).collect();
                let mut count = 0;
                for (c, v) in self.cells.iter_mut().zip(fresh) {
                    if c.value != v {
                        c.value = v;
                        count += 1;
                    }
                }
                self.steps.push(StepObs { count, cells: self.cells.iter().map(|c| c.value).collect() });
                let n = if self.step_returns_bool { i64::from(count > 0) } else { count as i64 };
                Ok(konst(n))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub fuel: u64,
    pub step_returns_bool: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { fuel: 1_000_000, step_returns_bool: false }
    }
}

/// Evaluates a closed, well-typed term. Runs on its own thread with a large
/// stack, since the interpreter recurses on the term.
pub fn oracle_eval(t: &Term, cfg: &OracleConfig) -> Result<OracleRun, OracleError> {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK)
            .spawn_scoped(s, || eval_here(t, cfg))
            .expect("spawn oracle thread")
            .join()
            .expect("oracle panicked")
    })
}

const STACK: usize = 512 << 20;

fn eval_here(t: &Term, cfg: &OracleConfig) -> Result<OracleRun, OracleError> {
    let mut it = Interp {
        cells: Vec::new(),
        peeks: Vec::new(),
        steps: Vec::new(),
        fuel: cfg.fuel,
        depth: 0,
        step_returns_bool: cfg.step_returns_bool,
    };
    let v = it.eval(t, &Rc::new(Env::Nil))?;
    let value = match v {
        Val::Int(n, _) => Value::Int(n),
        Val::Unit => Value::Unit,
        Val::Fun(_) => Value::Fun,
        Val::Cell(i, _) => Value::Cell(i),
    };
    Ok(OracleRun { value, peeks: it.peeks, steps: it.steps, cells: it.cells.iter().map(|c| c.value).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn run(src: &str) -> OracleRun {
        oracle_eval(&parse(src).unwrap(), &OracleConfig::default()).unwrap()
    }

    #[test]
    fn larger_of_two_cells() {
        let r = run("let x = ref 0 in let y = ref 1 in link x 2; link y 3;
            let out = if deref y <= deref x then deref x else deref y in
            peek out; step; peek out; step; peek out");
        assert_eq!(r.peeks, vec![1, 3, 3]);
        assert_eq!(r.steps[0], StepObs { count: 2, cells: vec![2, 3] });
        assert_eq!(r.steps[1].count, 0);
    }

    #[test]
    fn unchanged_dependency_is_not_an_update() {
        assert_eq!(run("let c = ref 1 in step").value, Value::Int(0));
    }

    #[test]
    fn partial_primitives() {
        assert_eq!(run("let add = (+) in add 1 2").value, Value::Int(3));
        assert_eq!(run("(λf. f 10) ((-) 3)").value, Value::Int(-7));
    }

    #[test]
    fn recursion_and_fuel() {
        assert_eq!(run("(rec f. λn. if n then n * f (n - 1) else 1) 5").value, Value::Int(120));
        let e = oracle_eval(&parse("(rec f. λx. f x) 1").unwrap(), &OracleConfig { fuel: 10_000, ..Default::default() });
        assert!(matches!(e, Err(OracleError::Fuel | OracleError::Depth)));
    }

    #[test]
    fn stabilises_on_acyclic_nets() {
        let r = run("let a = ref 1 in let b = ref 0 in link b (deref a + 1); step; step; step");
        assert_eq!(r.steps.iter().map(|s| s.count).collect::<Vec<_>>(), vec![1, 0, 0]);
    }

    #[test]
    fn root_reads_the_dependency() {
        let r = run("let a = ref 1 in let b = ref 0 in link b (deref a + 1); assign b 7; peek (root b)");
        assert_eq!(r.peeks, vec![2]);
    }
}

#[cfg(test)]
mod differential {
    use super::gen::{gen_program, GenConfig};
    use super::*;
    use crate::machine::{Config, ValidateLevel};
    use crate::syntax::{parse, pretty};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn programs_agree() {
        for f in ["const", "larger", "alt", "composite", "sieve", "sieve8"] {
            let path = format!("{}/../../programs/{f}.tsd", env!("CARGO_MANIFEST_DIR"));
            let t = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
            let a = differential_check(&t, &Config::default());
            assert!(a.agrees() && !a.inconclusive, "{f}: {:?}", a.mismatches);
        }
    }

    #[test]
    fn generated_programs_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = Config { fuel: 2_000_000, validate: ValidateLevel::Commit, ..Config::default() };
        for _ in 0..200 {
            let t = gen_program(&mut rng, &GenConfig::default());
            let a = differential_check(&t, &cfg);
            assert!(a.agrees() && !a.inconclusive, "{}\n{:?}\n{:?}", pretty(&t), a.mismatches, a.machine);
        }
    }
}
