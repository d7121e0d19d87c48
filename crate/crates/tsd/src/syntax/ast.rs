use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Cell,
    Unit,
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    /// Int, Cell and Unit are the only types an `if` may branch at.
    pub fn is_ground(&self) -> bool {
        !matches!(self, Type::Arrow(..))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "Int"),
            Type::Cell => write!(f, "Cell"),
            Type::Unit => write!(f, "Unit"),
            Type::Arrow(a, b) => {
                if matches!(**a, Type::Arrow(..)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
        }
    }
}

/// Binary operators. Comparisons and the logical connectives yield 1 or 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Le,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 11] = [
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

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "<>",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Arithmetic wraps on overflow; division and remainder by zero give 0.
    pub fn apply(self, m: i64, n: i64) -> i64 {
        match self {
            BinOp::Add => m.wrapping_add(n),
            BinOp::Sub => m.wrapping_sub(n),
            BinOp::Mul => m.wrapping_mul(n),
            BinOp::Div => {
                if n == 0 {
                    0
                } else {
                    m.wrapping_div(n)
                }
            }
            BinOp::Mod => {
                if n == 0 {
                    0
                } else {
                    m.wrapping_rem(n)
                }
            }
            BinOp::Eq => (m == n) as i64,
            BinOp::Ne => (m != n) as i64,
            BinOp::Le => (m <= n) as i64,
            BinOp::Lt => (m < n) as i64,
            BinOp::And => (m != 0 && n != 0) as i64,
            BinOp::Or => (m != 0 || n != 0) as i64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Bin(BinOp),
    Ref,
    Deref,
    Root,
    Link,
    Assign,
    Peek,
    Step,
}

impl Prim {
    pub fn arity(self) -> usize {
        match self {
            Prim::Bin(_) | Prim::Link | Prim::Assign => 2,
            Prim::Ref | Prim::Deref | Prim::Root | Prim::Peek => 1,
            Prim::Step => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Prim::Bin(op) => op.symbol(),
            Prim::Ref => "ref",
            Prim::Deref => "deref",
            Prim::Root => "root",
            Prim::Link => "link",
            Prim::Assign => "assign",
            Prim::Peek => "peek",
            Prim::Step => "step",
        }
    }

    pub fn signature(self) -> Type {
        use Type::*;
        match self {
            Prim::Bin(_) => Type::arrow(Int, Type::arrow(Int, Int)),
            Prim::Ref => Type::arrow(Int, Cell),
            Prim::Deref => Type::arrow(Cell, Int),
            Prim::Root => Type::arrow(Cell, Int),
            Prim::Link | Prim::Assign => Type::arrow(Cell, Type::arrow(Int, Unit)),
            Prim::Peek => Type::arrow(Int, Int),
            Prim::Step => Int,
        }
    }
}

/// Core terms. `let` and `;` are parsed straight into `App(Lam ..)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lam(String, Option<Type>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Int(i64),
    Unit,
    Op(Prim),
    If(Box<Term>, Box<Term>, Box<Term>),
    Rec(String, Option<Type>, Box<Term>),
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn lam(x: &str, body: Term) -> Term {
        Term::Lam(x.to_string(), None, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn bin(op: BinOp, l: Term, r: Term) -> Term {
        Term::apps(Term::Op(Prim::Bin(op)), [l, r])
    }

    pub fn prim(p: Prim, args: impl IntoIterator<Item = Term>) -> Term {
        Term::apps(Term::Op(p), args)
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn let_in(x: &str, bound: Term, body: Term) -> Term {
        Term::app(Term::lam(x, body), bound)
    }

    pub fn seq(first: Term, rest: Term) -> Term {
        Term::app(Term::lam("_", rest), first)
    }

    /// Splits an application spine into head and arguments, left to right.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Unit | Term::Op(_) => 1,
            Term::Lam(_, _, b) | Term::Rec(_, _, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::If(c, t, e) => 1 + c.size() + t.size() + e.size(),
        }
    }

    pub fn contains_rec(&self) -> bool {
        match self {
            Term::Rec(..) => true,
            Term::Var(_) | Term::Int(_) | Term::Unit | Term::Op(_) => false,
            Term::Lam(_, _, b) => b.contains_rec(),
            Term::App(f, a) => f.contains_rec() || a.contains_rec(),
            Term::If(c, t, e) => c.contains_rec() || t.contains_rec() || e.contains_rec(),
        }
    }

    pub fn free_vars(&self) -> Vec<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::Int(_) | Term::Unit | Term::Op(_) => {}
                Term::Lam(x, _, b) | Term::Rec(x, _, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::If(c, th, el) => {
                    go(c, bound, out);
                    go(th, bound, out);
                    go(el, bound, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}
