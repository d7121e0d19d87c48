//! Random well-typed programs for differential testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::syntax::{BinOp, Prim, Term, Type};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub depth: usize,
    pub max_cells: usize,
    /// Allow `rec`; such programs may diverge.
    pub recursive: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { depth: 4, max_cells: 8, recursive: false }
    }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
    scope: Vec<(String, Type)>,
    fresh: usize,
    cells: usize,
    /// Inside a function body: no new cells there, so the count stays
    /// bounded however often the function runs.
    in_fun: usize,
}

const OPS: [BinOp; 11] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Mod,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Le,
    BinOp::Lt,
    BinOp::And,
    BinOp::Or,
];

impl<R: Rng> Gen<'_, R> {
    fn name(&mut self, p: &str) -> String {
        self.fresh += 1;
        format!("{p}{}", self.fresh)
    }

    fn pick_var(&mut self, ty: &Type) -> Option<Term> {
        let vs: Vec<&String> = self.scope.iter().filter(|(_, t)| t == ty).map(|(x, _)| x).collect();
        vs.choose(self.rng).map(|x| Term::var(x))
    }

    fn bind<T>(&mut self, x: &str, ty: Type, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((x.to_string(), ty));
        let r = f(self);
        self.scope.pop();
        r
    }

    fn small(&mut self) -> Term {
        Term::Int(self.rng.gen_range(-3..10))
    }

    fn int(&mut self, d: usize) -> Term {
        if d == 0 {
            return match self.rng.gen_range(0..3) {
                0 => self.pick_var(&Type::Int).unwrap_or_else(|| self.small()),
                1 => match self.pick_var(&Type::Cell) {
                    Some(c) => Term::prim(Prim::Deref, [c]),
                    None => self.small(),
                },
                _ => self.small(),
            };
        }
        match self.rng.gen_range(0..20) {
            0..=1 => self.small(),
            2..=3 => self.int(0),
            4..=6 => {
                let c = self.cell(d - 1);
                Term::prim(Prim::Deref, [c])
            }
            7..=9 => {
                let op = *OPS.choose(self.rng).unwrap();
                Term::bin(op, self.int(d - 1), self.int(d - 1))
            }
            10 => Term::ite(self.int(d - 1), self.int(d - 1), self.int(d - 1)),
            11..=12 => Term::prim(Prim::Peek, [self.int(d - 1)]),
            13 => Term::Op(Prim::Step),
            14 => Term::app(self.fun(d - 1), self.int(d - 1)),
            15 => {
                let x = self.name("x");
                let bound = self.int(d - 1);
                let body = self.bind(&x, Type::Int, |g| g.int(d - 1));
                Term::let_in(&x, bound, body)
            }
            16 => Term::prim(Prim::Root, [self.cell(d - 1)]),
            17 if self.in_fun == 0 && self.cells < self.cfg.max_cells => {
                let c = self.name("c");
                let bound = self.cell(d - 1);
                let body = self.bind(&c, Type::Cell, |g| g.int(d - 1));
                Term::let_in(&c, bound, body)
            }
            _ => Term::seq(self.unit(d - 1), self.int(d - 1)),
        }
    }

    fn cell(&mut self, d: usize) -> Term {
        let can_make = self.in_fun == 0 && self.cells < self.cfg.max_cells;
        match self.rng.gen_range(0..6) {
            0 if can_make => {
                self.cells += 1;
                Term::prim(Prim::Ref, [self.int(d.saturating_sub(1))])
            }
            1 if d > 0 => Term::ite(self.int(d - 1), self.cell(d - 1), self.cell(d - 1)),
            _ => match self.pick_var(&Type::Cell) {
                Some(c) => c,
                None if can_make => {
                    self.cells += 1;
                    Term::prim(Prim::Ref, [self.small()])
                }
                // the prelude always binds a cell, so this is unreachable
                // in practice
                None => Term::prim(Prim::Ref, [Term::Int(0)]),
            },
        }
    }

    fn unit(&mut self, d: usize) -> Term {
        match self.rng.gen_range(0..10) {
            0..=3 => Term::prim(Prim::Link, [self.cell(d), self.int(d)]),
            4..=5 => Term::prim(Prim::Assign, [self.cell(d), self.int(d)]),
            6 => Term::Unit,
            7 if d > 0 => Term::seq(self.unit(d - 1), self.unit(d - 1)),
            _ => {
                // step for its effect
                let x = self.name("_s");
                Term::app(Term::lam(&x, Term::Unit), Term::Op(Prim::Step))
            }
        }
    }

    fn fun(&mut self, d: usize) -> Term {
        let arrow = Type::arrow(Type::Int, Type::Int);
        match self.rng.gen_range(0..6) {
            0 => match self.pick_var(&arrow) {
                Some(f) => f,
                None => self.lambda(d),
            },
            1 => {
                let op = *OPS.choose(self.rng).unwrap();
                Term::app(Term::Op(Prim::Bin(op)), self.int(d))
            }
            2 => Term::Op(Prim::Peek),
            3 if self.cfg.recursive => self.recursive(d),
            _ => self.lambda(d),
        }
    }

    fn lambda(&mut self, d: usize) -> Term {
        let x = self.name("x");
        self.in_fun += 1;
        let body = self.bind(&x, Type::Int, |g| g.int(d));
        self.in_fun -= 1;
        Term::lam(&x, body)
    }

    /// `rec f. λn. if n <= 0 then base else step (f (n - 1))`, or an
    /// unguarded variant that may run forever.
    fn recursive(&mut self, d: usize) -> Term {
        let f = self.name("f");
        let n = self.name("n");
        self.in_fun += 1;
        let arrow = Type::arrow(Type::Int, Type::Int);
        let body = self.bind(&f, arrow, |g| {
            g.bind(&n, Type::Int, |g| {
                let base = g.int(d.saturating_sub(1));
                let call = Term::app(Term::var(&f), Term::bin(BinOp::Sub, Term::var(&n), Term::Int(1)));
                let more = Term::bin(*OPS.choose(g.rng).unwrap(), call, g.int(d.saturating_sub(1)));
                if g.rng.gen_ratio(1, 5) {
                    // guard on an arbitrary integer: may diverge
                    Term::ite(g.int(d.saturating_sub(1)), base, more)
                } else {
                    Term::ite(Term::bin(BinOp::Le, Term::var(&n), Term::Int(0)), base, more)
                }
            })
        });
        self.in_fun -= 1;
        Term::Rec(f, None, Box::new(Term::lam(&n, body)))
    }
}

/// A closed program of type Int: a prelude of one to three cells followed
/// by a random body.
pub fn gen_program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Term {
    let mut g = Gen { rng, cfg, scope: Vec::new(), fresh: 0, cells: 0, in_fun: 0 };
    let k = g.rng.gen_range(1..=3usize.min(cfg.max_cells.max(1)));
    let mut prelude = Vec::new();
    for _ in 0..k {
        let c = g.name("c");
        let init = g.int(1);
        g.cells += 1;
        g.scope.push((c.clone(), Type::Cell));
        prelude.push((c, Term::prim(Prim::Ref, [init])));
    }
    let rec_fn = cfg.recursive.then(|| {
        let r = g.name("r");
        let def = g.recursive(2);
        (r, def)
    });
    if let Some((r, _)) = &rec_fn {
        g.scope.push((r.clone(), Type::arrow(Type::Int, Type::Int)));
    }
    let mut body = g.int(cfg.depth);
    if let Some((r, def)) = rec_fn {
        let call = Term::app(Term::var(&r), g.int(1));
        body = Term::let_in(&r, def, Term::bin(BinOp::Add, call, body));
        g.scope.pop();
    }
    // make sure something reactive happens most of the time
    if g.rng.gen_ratio(3, 4) {
        let u = g.unit(cfg.depth.saturating_sub(1));
        let s = Term::app(Term::lam("_", body), Term::Op(Prim::Step));
        body = Term::seq(u, s);
    }
    for (c, init) in prelude.into_iter().rev() {
        body = Term::let_in(&c, init, body);
    }
    body
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::typecheck;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_are_closed_and_typed() {
        for recursive in [false, true] {
            let cfg = GenConfig { recursive, ..Default::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..300 {
                let t = gen_program(&mut rng, &cfg);
                assert!(t.free_vars().is_empty());
                assert_eq!(typecheck(&t), Ok(Type::Int), "{t:?}");
                assert_eq!(t.contains_rec(), recursive);
            }
        }
    }
}
