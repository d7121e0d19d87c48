use super::ast::{BinOp, Prim, Term, Type};
use super::lexer::{lex, Spanned, Tok};
use super::SyntaxError;

/// Parses a whole program. `let`, `;`, `true` and `false` are desugared here.
pub fn parse(src: &str) -> Result<Term, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    if p.peek() == &Tok::Eof {
        return Err(p.error("empty program"));
    }
    let t = p.seq()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Type, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.ty()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(t)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

fn prim_named(name: &str) -> Option<Prim> {
    Some(match name {
        "ref" => Prim::Ref,
        "deref" => Prim::Deref,
        "root" => Prim::Root,
        "link" => Prim::Link,
        "assign" => Prim::Assign,
        "peek" => Prim::Peek,
        "step" => Prim::Step,
        _ => return None,
    })
}

fn binop_of(t: &Tok) -> Option<BinOp> {
    Some(match t {
        Tok::Plus => BinOp::Add,
        Tok::Minus => BinOp::Sub,
        Tok::Star => BinOp::Mul,
        Tok::Slash => BinOp::Div,
        Tok::Percent => BinOp::Mod,
        Tok::EqEq => BinOp::Eq,
        Tok::NotEq => BinOp::Ne,
        Tok::LessEq => BinOp::Le,
        Tok::Less => BinOp::Lt,
        Tok::AndAnd => BinOp::And,
        Tok::OrOr => BinOp::Or,
        _ => return None,
    })
}

// Binary precedence levels, loosest first.
const LEVELS: [&[BinOp]; 5] = [
    &[BinOp::Or],
    &[BinOp::And],
    &[BinOp::Eq, BinOp::Ne, BinOp::Le, BinOp::Lt],
    &[BinOp::Add, BinOp::Sub],
    &[BinOp::Mul, BinOp::Div, BinOp::Mod],
];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let s = &self.toks[self.pos];
        SyntaxError { line: s.line, col: s.col, msg: msg.into() }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(x) if prim_named(&x).is_none() => {
                self.advance();
                Ok(x)
            }
            t => Err(self.error(format!("expected identifier, found {t:?}"))),
        }
    }

    fn seq(&mut self) -> Result<Term, SyntaxError> {
        let first = self.expr()?;
        if *self.peek() == Tok::Semi {
            self.advance();
            let rest = self.seq()?;
            Ok(Term::seq(first, rest))
        } else {
            Ok(first)
        }
    }

    fn starts_prefix(&self) -> bool {
        matches!(self.peek(), Tok::Lambda | Tok::Let | Tok::If | Tok::Rec)
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Tok::Lambda => {
                self.advance();
                let (x, ann) = self.binder()?;
                self.expect(Tok::Dot, "'.' after binder")?;
                let body = self.seq()?;
                Ok(Term::Lam(x, ann, Box::new(body)))
            }
            Tok::Rec => {
                self.advance();
                let (f, ann) = self.binder()?;
                self.expect(Tok::Dot, "'.' after rec binder")?;
                let body = self.seq()?;
                Ok(Term::Rec(f, ann, Box::new(body)))
            }
            Tok::Let => {
                self.advance();
                let x = self.ident()?;
                let ann = if *self.peek() == Tok::Colon {
                    self.advance();
                    Some(self.ty()?)
                } else {
                    None
                };
                self.expect(Tok::Equals, "'=' in let")?;
                let bound = self.seq()?;
                self.expect(Tok::In, "'in'")?;
                let body = self.seq()?;
                Ok(Term::app(Term::Lam(x, ann, Box::new(body)), bound))
            }
            Tok::If => {
                self.advance();
                let c = self.seq()?;
                self.expect(Tok::Then, "'then'")?;
                let t = self.seq()?;
                self.expect(Tok::Else, "'else'")?;
                let e = self.expr()?;
                Ok(Term::ite(c, t, e))
            }
            _ => self.binary(0),
        }
    }

    fn binder(&mut self) -> Result<(String, Option<Type>), SyntaxError> {
        if *self.peek() == Tok::LParen {
            self.advance();
            let x = self.ident()?;
            self.expect(Tok::Colon, "':' in annotated binder")?;
            let t = self.ty()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok((x, Some(t)));
        }
        let x = self.ident()?;
        if *self.peek() == Tok::Colon {
            self.advance();
            let t = self.ty()?;
            return Ok((x, Some(t)));
        }
        Ok((x, None))
    }

    fn binary(&mut self, level: usize) -> Result<Term, SyntaxError> {
        if level == LEVELS.len() {
            return self.app();
        }
        let mut lhs = self.operand(level + 1)?;
        loop {
            let op = match binop_of(self.peek()) {
                Some(op) if LEVELS[level].contains(&op) => op,
                _ => break,
            };
            self.advance();
            let rhs = self.operand(level + 1)?;
            lhs = Term::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    // A prefix form may close off an operator chain, as in `1 + if c then 2 else 3`.
    fn operand(&mut self, level: usize) -> Result<Term, SyntaxError> {
        if self.starts_prefix() {
            self.expr()
        } else {
            self.binary(level)
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Int(_) | Tok::LParen | Tok::True | Tok::False
        )
    }

    fn app(&mut self) -> Result<Term, SyntaxError> {
        let mut f = if *self.peek() == Tok::Minus && matches!(self.peek_at(1), Tok::Int(_)) {
            self.advance();
            self.negative_literal()?
        } else {
            self.atom()?
        };
        loop {
            if self.starts_atom() {
                let a = self.atom()?;
                f = Term::app(f, a);
            } else if self.starts_prefix() {
                let a = self.expr()?;
                f = Term::app(f, a);
                break;
            } else {
                break;
            }
        }
        Ok(f)
    }

    fn negative_literal(&mut self) -> Result<Term, SyntaxError> {
        match self.advance() {
            Tok::Int(n) => {
                let v = -(n as i128);
                if v < i64::MIN as i128 {
                    Err(self.error("integer literal out of range"))
                } else {
                    Ok(Term::Int(v as i64))
                }
            }
            t => Err(self.error(format!("expected integer, found {t:?}"))),
        }
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        match self.advance() {
            Tok::Ident(x) => Ok(match prim_named(&x) {
                Some(p) => Term::Op(p),
                None => Term::Var(x),
            }),
            Tok::Int(n) => {
                if n > i64::MAX as u64 {
                    Err(self.error("integer literal out of range"))
                } else {
                    Ok(Term::Int(n as i64))
                }
            }
            Tok::True => Ok(Term::Int(1)),
            Tok::False => Ok(Term::Int(0)),
            Tok::LParen => {
                if *self.peek() == Tok::RParen {
                    self.advance();
                    return Ok(Term::Unit);
                }
                if let Some(op) = binop_of(self.peek()) {
                    if *self.peek_at(1) == Tok::RParen {
                        self.advance();
                        self.advance();
                        return Ok(Term::Op(Prim::Bin(op)));
                    }
                }
                let t = self.seq()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            t => {
                // step back so the error points at the offending token
                self.pos = self.pos.saturating_sub(1);
                Err(self.error(format!("unexpected {t:?}")))
            }
        }
    }

    fn ty(&mut self) -> Result<Type, SyntaxError> {
        let lhs = match self.advance() {
            Tok::Ident(n) if n == "Int" => Type::Int,
            Tok::Ident(n) if n == "Cell" => Type::Cell,
            Tok::Ident(n) if n == "Unit" => Type::Unit,
            Tok::LParen => {
                let t = self.ty()?;
                self.expect(Tok::RParen, "')'")?;
                t
            }
            t => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.error(format!("expected a type, found {t:?}")));
            }
        };
        if *self.peek() == Tok::Arrow {
            self.advance();
            Ok(Type::arrow(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }
}
