use std::fmt;

use super::ast::{Term, Type};
use super::pretty::pretty;

/// Variable typing context. Later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    entries: Vec<(String, Type)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, x: &str, t: Type) -> Self {
        self.entries.push((x.to_string(), t));
        self
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (x, _) in self.entries.iter().rev() {
            if !out.contains(x) {
                out.push(x.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("type mismatch in `{term}`: expected {expected}, found {found}")]
    Mismatch { term: String, expected: String, found: String },
    #[error("`if` branches must have type Int, Cell or Unit, found {ty} in `{term}`")]
    IfNotGround { term: String, ty: String },
    #[error("`rec` must bind a function literal: `{term}`")]
    RecNotLambda { term: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Var(usize),
    Int,
    Cell,
    Unit,
    Arrow(Box<Ty>, Box<Ty>),
}

impl Ty {
    fn of(t: &Type) -> Ty {
        match t {
            Type::Int => Ty::Int,
            Type::Cell => Ty::Cell,
            Type::Unit => Ty::Unit,
            Type::Arrow(a, b) => Ty::Arrow(Box::new(Ty::of(a)), Box::new(Ty::of(b))),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Var(v) => write!(f, "'t{v}"),
            Ty::Int => write!(f, "Int"),
            Ty::Cell => write!(f, "Cell"),
            Ty::Unit => write!(f, "Unit"),
            Ty::Arrow(a, b) if matches!(**a, Ty::Arrow(..)) => write!(f, "({a}) -> {b}"),
            Ty::Arrow(a, b) => write!(f, "{a} -> {b}"),
        }
    }
}

fn snippet(t: &Term) -> String {
    let s = pretty(t);
    if s.chars().count() > 80 {
        let cut: String = s.chars().take(77).collect();
        format!("{cut}...")
    } else {
        s
    }
}

#[derive(Default)]
struct Infer {
    subst: Vec<Option<Ty>>,
    // branch types to check for groundness once everything is solved
    branches: Vec<(Ty, String)>,
}

impl Infer {
    fn fresh(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Var(self.subst.len() - 1)
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.subst[v] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match self.shallow(t) {
            Ty::Arrow(a, b) => Ty::Arrow(Box::new(self.resolve(&a)), Box::new(self.resolve(&b))),
            other => other,
        }
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Var(w) => v == w,
            Ty::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        let (a, b) = (self.shallow(a), self.shallow(b));
        match (a, b) {
            (Ty::Var(v), Ty::Var(w)) if v == w => true,
            (Ty::Var(v), t) | (t, Ty::Var(v)) => {
                if self.occurs(v, &t) {
                    return false;
                }
                self.subst[v] = Some(t);
                true
            }
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => self.unify(&a1, &a2) && self.unify(&b1, &b2),
            (x, y) => x == y,
        }
    }

    fn expect(&mut self, term: &Term, expected: &Ty, found: &Ty) -> Result<(), TypeError> {
        if self.unify(expected, found) {
            Ok(())
        } else {
            Err(TypeError::Mismatch {
                term: snippet(term),
                expected: self.resolve(expected).to_string(),
                found: self.resolve(found).to_string(),
            })
        }
    }

    fn infer(&mut self, env: &mut Vec<(String, Ty)>, t: &Term) -> Result<Ty, TypeError> {
        match t {
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, ty)| ty.clone())
                .ok_or_else(|| TypeError::Unbound(x.clone())),
            Term::Int(_) => Ok(Ty::Int),
            Term::Unit => Ok(Ty::Unit),
            Term::Op(p) => Ok(Ty::of(&p.signature())),
            Term::Lam(x, ann, body) => {
                let a = match ann {
                    Some(ty) => Ty::of(ty),
                    None => self.fresh(),
                };
                env.push((x.clone(), a.clone()));
                let b = self.infer(env, body);
                env.pop();
                Ok(Ty::Arrow(Box::new(a), Box::new(b?)))
            }
            Term::App(f, a) => {
                let tf = self.infer(env, f)?;
                let ta = self.infer(env, a)?;
                let r = self.fresh();
                let want = Ty::Arrow(Box::new(ta), Box::new(r.clone()));
                if let Ty::Arrow(dom, _) = self.shallow(&tf) {
                    let Ty::Arrow(ta, _) = &want else { unreachable!() };
                    self.expect(a, &dom, ta)?;
                }
                self.expect(t, &tf, &want)?;
                Ok(r)
            }
            Term::If(c, th, el) => {
                let tc = self.infer(env, c)?;
                self.expect(c, &Ty::Int, &tc)?;
                let tt = self.infer(env, th)?;
                let te = self.infer(env, el)?;
                self.expect(el, &tt, &te)?;
                self.branches.push((tt.clone(), snippet(t)));
                Ok(tt)
            }
            Term::Rec(f, ann, body) => {
                if !matches!(**body, Term::Lam(..)) {
                    return Err(TypeError::RecNotLambda { term: snippet(t) });
                }
                let a = match ann {
                    Some(ty) => Ty::of(ty),
                    None => self.fresh(),
                };
                env.push((f.clone(), a.clone()));
                let tb = self.infer(env, body);
                env.pop();
                let tb = tb?;
                self.expect(t, &a, &tb)?;
                Ok(a)
            }
        }
    }

    fn finish(&self, t: &Ty) -> Type {
        match self.resolve(t) {
            Ty::Var(_) | Ty::Int => Type::Int,
            Ty::Cell => Type::Cell,
            Ty::Unit => Type::Unit,
            Ty::Arrow(a, b) => Type::arrow(self.finish(&a), self.finish(&b)),
        }
    }
}

/// Simple-type inference by unification. Annotations are optional; a type
/// left undetermined after solving defaults to Int.
pub fn infer_type(env: &TypeEnv, term: &Term) -> Result<Type, TypeError> {
    let mut inf = Infer::default();
    let mut scope: Vec<(String, Ty)> =
        env.entries.iter().map(|(x, t)| (x.clone(), Ty::of(t))).collect();
    let ty = inf.infer(&mut scope, term)?;
    for (bt, at) in &inf.branches {
        if matches!(inf.resolve(bt), Ty::Arrow(..)) {
            return Err(TypeError::IfNotGround { term: at.clone(), ty: inf.resolve(bt).to_string() });
        }
    }
    Ok(inf.finish(&ty))
}

pub fn typecheck(term: &Term) -> Result<Type, TypeError> {
    infer_type(&TypeEnv::new(), term)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn ty(src: &str) -> Result<Type, TypeError> {
        typecheck(&parse(src).unwrap())
    }

    #[test]
    fn identity_defaults_to_int() {
        assert_eq!(ty("λx.x").unwrap(), Type::arrow(Type::Int, Type::Int));
        let annotated = Term::Lam("x".into(), Some(Type::Int), Box::new(Term::var("x")));
        assert_eq!(typecheck(&annotated).unwrap(), Type::arrow(Type::Int, Type::Int));
    }

    #[test]
    fn primitive_signatures() {
        assert_eq!(ty("ref 1").unwrap(), Type::Cell);
        assert_eq!(ty("deref (ref 1)").unwrap(), Type::Int);
        assert_eq!(ty("root (ref 1)").unwrap(), Type::Int);
        assert_eq!(ty("link (ref 1) 2").unwrap(), Type::Unit);
        assert_eq!(ty("assign (ref 1) 2").unwrap(), Type::Unit);
        assert_eq!(ty("peek 3").unwrap(), Type::Int);
        assert_eq!(ty("step").unwrap(), Type::Int);
        assert!(ty("deref 1").is_err());
        assert!(ty("link 1 (ref 2)").is_err());
    }

    #[test]
    fn if_branches_must_be_ground() {
        let e = ty("if 0 then λx.x else λx.x").unwrap_err();
        assert!(matches!(e, TypeError::IfNotGround { .. }), "{e}");
        assert_eq!(ty("if 0 then ref 1 else ref 2").unwrap(), Type::Cell);
        assert!(ty("if ref 1 then 1 else 2").is_err());
    }

    #[test]
    fn recursion() {
        assert_eq!(
            ty("rec f. λx. if x then f (x - 1) else 0").unwrap(),
            Type::arrow(Type::Int, Type::Int)
        );
        assert!(matches!(ty("rec f. f").unwrap_err(), TypeError::RecNotLambda { .. }));
    }

    #[test]
    fn unbound_and_shadowing() {
        assert_eq!(ty("y").unwrap_err(), TypeError::Unbound("y".into()));
        let env = TypeEnv::new().with("x", Type::Int).with("x", Type::Cell);
        assert_eq!(infer_type(&env, &Term::var("x")).unwrap(), Type::Cell);
        assert_eq!(env.lookup("x"), Some(&Type::Cell));
    }

    #[test]
    fn state_machine_program() {
        let src = "let sm = λi.λf.λx.let s = ref i in link s (f s x); deref s in
                   let alt = sm 1 (λs.λi.1 - deref s) 0 in
                   let sum = λx.sm 0 (λs.λi.i + deref s) x in
                   let a = sum alt in a";
        assert_eq!(ty(src).unwrap(), Type::Int);
    }

    #[test]
    fn monomorphic() {
        assert!(ty("let id = λx.x in id 1; id ()").is_err());
    }
}
