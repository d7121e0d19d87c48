use super::ast::{BinOp, Prim, Term};

// Printing levels mirror the parser: sequence, prefix forms, the five
// operator tiers, application, atoms.
const SEQ: u8 = 0;
const PREFIX: u8 = 1;
const APP: u8 = 7;
const ATOM: u8 = 8;

fn op_level(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 2,
        BinOp::And => 3,
        BinOp::Eq | BinOp::Ne | BinOp::Le | BinOp::Lt => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
    }
}

/// Renders a term so that `parse(pretty(t)) == t`.
pub fn pretty(t: &Term) -> String {
    let mut s = String::new();
    go(t, SEQ, &mut s);
    s
}

fn wrap(out: &mut String, need: bool, f: impl FnOnce(&mut String)) {
    if need {
        out.push('(');
    }
    f(out);
    if need {
        out.push(')');
    }
}

fn binder(x: &str, ann: &Option<super::ast::Type>) -> String {
    match ann {
        Some(t) => format!("({x} : {t})"),
        None => x.to_string(),
    }
}

fn go(t: &Term, ctx: u8, out: &mut String) {
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Int(n) if *n < 0 => out.push_str(&format!("(-{})", n.unsigned_abs())),
        Term::Int(n) => out.push_str(&n.to_string()),
        Term::Unit => out.push_str("()"),
        Term::Op(Prim::Bin(op)) => {
            out.push('(');
            out.push_str(op.symbol());
            out.push(')');
        }
        Term::Op(p) => out.push_str(p.name()),
        Term::Lam(x, ann, body) => wrap(out, ctx > PREFIX, |out| {
            out.push('λ');
            out.push_str(&binder(x, ann));
            out.push('.');
            go(body, SEQ, out);
        }),
        Term::Rec(f, ann, body) => wrap(out, ctx > PREFIX, |out| {
            out.push_str("rec ");
            out.push_str(&binder(f, ann));
            out.push('.');
            go(body, SEQ, out);
        }),
        Term::If(c, th, el) => wrap(out, ctx > PREFIX, |out| {
            out.push_str("if ");
            go(c, SEQ, out);
            out.push_str(" then ");
            go(th, SEQ, out);
            out.push_str(" else ");
            go(el, PREFIX, out);
        }),
        Term::App(f, a) => {
            if let Term::Lam(x, None, body) = &**f {
                if x == "_" {
                    return wrap(out, ctx > SEQ, |out| {
                        go(a, PREFIX + 1, out);
                        out.push_str("; ");
                        go(body, SEQ, out);
                    });
                }
                return wrap(out, ctx > PREFIX, |out| {
                    out.push_str("let ");
                    out.push_str(x);
                    out.push_str(" = ");
                    go(a, SEQ, out);
                    out.push_str(" in ");
                    go(body, SEQ, out);
                });
            }
            if let Term::App(g, l) = &**f {
                if let Term::Op(Prim::Bin(op)) = &**g {
                    let lvl = op_level(*op);
                    return wrap(out, ctx > lvl, |out| {
                        go(l, lvl, out);
                        out.push(' ');
                        out.push_str(op.symbol());
                        out.push(' ');
                        go(a, lvl + 1, out);
                    });
                }
            }
            wrap(out, ctx > APP, |out| {
                go(f, APP, out);
                out.push(' ');
                go(a, ATOM, out);
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn roundtrip(src: &str) {
        let t = parse(src).unwrap();
        let p = pretty(&t);
        assert_eq!(parse(&p).unwrap(), t, "printed as {p}");
    }

    #[test]
    fn identity_prints_plainly() {
        assert_eq!(pretty(&Term::lam("x", Term::var("x"))), "λx.x");
    }

    #[test]
    fn roundtrips() {
        roundtrip("1 + 2");
        roundtrip("(1 + 2) * 3 - 4 - (5 - 6)");
        roundtrip("let x = 1 in x; x");
        roundtrip("(let x = 1 in x); 2");
        roundtrip("f (λx.x) (if a then b else c)");
        roundtrip("if a then b else λx.x; y");
        roundtrip("(if a then b else λx.x); y");
        roundtrip("(+) 1");
        roundtrip("f (-3) ()");
        roundtrip("rec (f : Int -> Int).λx.f x");
        roundtrip("let y = (λ(x : Cell).deref x) in y");
        roundtrip("1 + if a then 2 else 3");
        roundtrip("link s (root s && (i == n || i % n <> 0))");
    }
}
