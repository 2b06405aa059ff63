//! Scalar expressions over space-time coordinates `q1..q4`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   = term   { ("+" | "-") term } ;
//! term   = unary  { ("*" | "/") unary } ;
//! unary  = "-" unary | power ;
//! power  = atom [ "^" unary ] ;
//! atom   = number | ident | ident "(" expr ")" | "(" expr ")" ;
//! number = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!        | "." digits [ exponent ] ;
//! ident  = letter { letter | digit | "_" } ;
//! ```
//!
//! Identifiers are `q1`..`q4`, `pi`, `c`, declared parameters, or one of the
//! functions `sin cos tan exp log sqrt sinh cosh tanh abs`.

mod dual;
mod eval;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dual::{Dual, Dual4};
pub use eval::{eval, eval_dual};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    /// `position` is the 1-based byte position of the offending token.
    #[error("parse error at position {position}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Coordinate `q{k+1}`.
    Var(usize),
    Pi,
    /// Speed of light, bound by the [`Env`].
    C,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    pub fn var(k: usize) -> Expr {
        assert!(k < 4, "coordinates are q1..q4");
        Expr::Var(k)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Div, a, b)
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Pow, a, b)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// True when the tree contains no coordinate reference.
    pub fn is_coordinate_free(&self) -> bool {
        match self {
            Expr::Var(_) => false,
            Expr::Num(_) | Expr::Pi | Expr::C | Expr::Param(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_coordinate_free(),
            Expr::Binary(_, a, b) => a.is_coordinate_free() && b.is_coordinate_free(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(x) if x.is_sign_negative() => 3,
            Expr::Neg(_) => 3,
            Expr::Binary(op, _, _) => op.precedence(),
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if x.is_sign_negative() => write!(f, "-{:?}", -x),
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(k) => write!(f, "q{}", k + 1),
            Expr::Pi => f.write_str("pi"),
            Expr::C => f.write_str("c"),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    write_operand(f, a, a.precedence() <= p)?;
                    f.write_str("^")?;
                    write_operand(f, b, b.precedence() < 3)
                } else {
                    write_operand(f, a, a.precedence() < p)?;
                    write!(f, " {} ", op.symbol())?;
                    write_operand(f, b, b.precedence() <= p)
                }
            }
        }
    }
}

/// Values bound to the named constants of an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Env {
    pub c: f64,
    pub params: BTreeMap<String, f64>,
}

impl Default for Env {
    fn default() -> Self {
        Env {
            c: 1.0,
            params: BTreeMap::new(),
        }
    }
}

impl Env {
    pub fn new(c: f64) -> Self {
        Env {
            c,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printing_minimal_parentheses() {
        let env = Env::default();
        for (src, printed) in [
            ("q1^2 + 3*q4", "q1^2.0 + 3.0 * q4"),
            ("-q1^2", "-q1^2.0"),
            ("(-q1)^2", "(-q1)^2.0"),
            ("q1 - (q2 - q3)", "q1 - (q2 - q3)"),
            ("(q1 - q2) - q3", "q1 - q2 - q3"),
            ("q1 / (q2 * q3)", "q1 / (q2 * q3)"),
            ("2^3^2", "2.0^3.0^2.0"),
            ("(2^3)^2", "(2.0^3.0)^2.0"),
            ("2^-q1", "2.0^-q1"),
            ("sin(q1 + pi)*c", "sin(q1 + pi) * c"),
        ] {
            assert_eq!(parse(src, &env).unwrap().to_string(), printed, "{src}");
        }
    }

    #[test]
    fn negative_literal_prints_as_negation() {
        let e = Expr::mul(Expr::Num(-2.0), Expr::var(0));
        assert_eq!(e.to_string(), "-2.0 * q1");
        let e = Expr::pow(Expr::Num(-2.0), Expr::Num(2.0));
        assert_eq!(e.to_string(), "(-2.0)^2.0");
    }
}
