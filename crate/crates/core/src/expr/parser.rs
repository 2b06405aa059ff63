//! Recursive-descent parser for the expression grammar.

use super::{BinOp, Env, Expr, ExprError, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn error(&self, at: usize, expected: &[&str], found: String) -> ExprError {
        ExprError::Parse {
            position: at + 1,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    /// Returns the token and its 0-based byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(start) else {
            return Ok((Tok::End, start));
        };
        if b.is_ascii_digit() || b == b'.' {
            return self.number(start).map(|x| (Tok::Num(x), start));
        }
        if b.is_ascii_alphabetic() {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_owned()), start));
        }
        self.pos += 1;
        let tok = match b {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(b as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(self.error(
                    start,
                    &["number", "identifier", "operator", "parenthesis"],
                    format!("`{ch}`"),
                ));
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<f64, ExprError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let mut pos = start;
        let int_digits = digits(&mut pos);
        let mut frac_digits = 0;
        if pos < bytes.len() && bytes[pos] == b'.' {
            pos += 1;
            frac_digits = digits(&mut pos);
        }
        if int_digits + frac_digits == 0 {
            return Err(self.error(start, &["digit"], "`.`".into()));
        }
        if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
            let mut p = pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if digits(&mut p) == 0 {
                let found = bytes
                    .get(p)
                    .map(|&c| format!("`{}`", c as char))
                    .unwrap_or_else(|| "end of input".into());
                return Err(self.error(p, &["exponent digits"], found));
            }
            pos = p;
        }
        self.pos = pos;
        self.src[start..pos]
            .parse::<f64>()
            .map_err(|_| self.error(start, &["number"], self.src[start..pos].to_owned()))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    env: &'a Env,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ExprError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn unexpected(&self, expected: &[&str]) -> ExprError {
        self.lexer.error(self.at, expected, self.tok.describe())
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            return Ok(Expr::pow(base, self.unary()?));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        if self.tok != Tok::RParen {
            return Err(self.unexpected(&["`)`", "operator"]));
        }
        self.bump()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(x) => {
                self.bump()?;
                Ok(Expr::Num(x))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if let Some(func) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return Err(self.unexpected(&["`(`"]));
                    }
                    self.bump()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::call(func, arg));
                }
                self.identifier(name, at)
            }
            other => {
                self.tok = other;
                Err(self.unexpected(&["number", "identifier", "`(`", "`-`"]))
            }
        }
    }

    fn identifier(&self, name: String, at: usize) -> Result<Expr, ExprError> {
        match name.as_str() {
            "q1" => Ok(Expr::Var(0)),
            "q2" => Ok(Expr::Var(1)),
            "q3" => Ok(Expr::Var(2)),
            "q4" => Ok(Expr::Var(3)),
            "pi" => Ok(Expr::Pi),
            "c" => Ok(Expr::C),
            _ if self.env.is_declared(&name) => Ok(Expr::Param(name)),
            _ => Err(ExprError::UnknownIdentifier {
                name,
                position: at + 1,
            }),
        }
    }
}

/// Parses `source`; parameters must be declared in `env`.
pub fn parse(source: &str, env: &Env) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        lexer: Lexer { src: source, pos: 0 },
        tok: Tok::End,
        at: 0,
        env,
    };
    parser.bump()?;
    if parser.tok == Tok::End {
        return Err(parser.unexpected(&["expression"]));
    }
    let e = parser.expr()?;
    if parser.tok != Tok::End {
        return Err(parser.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}
