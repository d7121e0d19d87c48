use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Lambda,
    Dot,
    LParen,
    RParen,
    Colon,
    Arrow,
    Semi,
    Equals,
    Let,
    In,
    If,
    Then,
    Else,
    Rec,
    True,
    False,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    LessEq,
    Less,
    AndAnd,
    OrOr,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() && c != 'λ' || c == '_'
}

fn is_ident_char(c: char) -> bool {
    (c.is_alphanumeric() && c != 'λ') || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let bump = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            bump(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let tok = match two.as_str() {
            "->" => Some(Tok::Arrow),
            "==" => Some(Tok::EqEq),
            "<>" => Some(Tok::NotEq),
            "<=" => Some(Tok::LessEq),
            "&&" => Some(Tok::AndAnd),
            "||" => Some(Tok::OrOr),
            _ => None,
        };
        if let Some(tok) = tok {
            out.push(Spanned { tok, line: tl, col: tc });
            bump(2, &mut i, &mut col);
            continue;
        }
        let single = match c {
            'λ' | '\\' => Some(Tok::Lambda),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Equals),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '×' => Some(Tok::Star),
            '/' | '÷' => Some(Tok::Slash),
            '%' => Some(Tok::Percent),
            '<' => Some(Tok::Less),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: tl, col: tc });
            bump(1, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = text.parse::<u64>().map_err(|_| SyntaxError {
                line: tl,
                col: tc,
                msg: format!("integer literal {text} out of range"),
            })?;
            out.push(Spanned { tok: Tok::Int(n), line: tl, col: tc });
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match text.as_str() {
                "let" => Tok::Let,
                "in" => Tok::In,
                "if" => Tok::If,
                "then" => Tok::Then,
                "else" => Tok::Else,
                "rec" => Tok::Rec,
                "true" => Tok::True,
                "false" => Tok::False,
                "fun" => Tok::Lambda,
                _ => Tok::Ident(text),
            };
            out.push(Spanned { tok, line: tl, col: tc });
            continue;
        }
        return Err(SyntaxError { line: tl, col: tc, msg: format!("unexpected character {c:?}") });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lambda_spellings() {
        assert_eq!(toks("λx.x")[0], Tok::Lambda);
        assert_eq!(toks("\\x.x")[0], Tok::Lambda);
    }

    #[test]
    fn comments_and_operators() {
        let t = toks("a <= b // trailing\n<> ||");
        assert_eq!(
            t,
            vec![
                Tok::Ident("a".into()),
                Tok::LessEq,
                Tok::Ident("b".into()),
                Tok::NotEq,
                Tok::OrOr,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn reports_position() {
        let e = lex("x\n  #").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
    }
}
