//! A small expression language for scalar fields on the torus.
//!
//! Grammar, loosest binding first; every binary level is left-associative
//! (so `2^3^2` is `(2^3)^2`):
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" atom)*
//! atom    := number | "x" | "y" | "z" | "pi" | func "(" sum ")" | "(" sum ")"
//! func    := "sin" | "cos" | "exp"
//! ```
//!
//! `-x^2` therefore parses as `-(x^2)`.

use std::fmt;

use thiserror::Error;

use crate::forms3::{Grid, ScalarField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` takes exactly one argument (offset {offset})")]
    Arity { name: String, offset: usize },
    #[error("unbalanced parenthesis at offset {offset}")]
    Unbalanced { offset: usize },
    #[error("unexpected {found} at offset {offset}")]
    Unexpected { found: String, offset: usize },
    #[error("invalid number `{text}` at offset {offset}")]
    Number { text: String, offset: usize },
    #[error("non-finite value {value} at node {index} (i={i}, j={j}, k={k})")]
    NonFinite {
        value: f64,
        index: usize,
        i: usize,
        j: usize,
        k: usize,
    },
}

impl ExprError {
    /// Byte offset into the source, for parse errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::UnknownIdentifier { offset, .. }
            | ExprError::Arity { offset, .. }
            | ExprError::Unbalanced { offset }
            | ExprError::Unexpected { offset, .. }
            | ExprError::Number { offset, .. } => Some(*offset),
            ExprError::NonFinite { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Pow => a.powf(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Var(Var::Z) => z,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(x, y, z),
            Expr::Call(f, e) => f.apply(e.eval(x, y, z)),
            Expr::Bin(op, a, b) => op.apply(a.eval(x, y, z), b.eval(x, y, z)),
        }
    }

    /// Whether the expression mentions the given coordinate.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(var),
            Expr::Bin(_, a, b) => a.uses(var) || b.uses(var),
        }
    }
}

/// Canonical fully parenthesized rendering.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Var(Var::Z) => f.write_str("z"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Bin(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
        }
    }
}

pub fn print(e: &Expr) -> String {
    e.to_string()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push((Tok::Num(v), start)),
                    _ => {
                        return Err(ExprError::Number {
                            text: text.to_string(),
                            offset: start,
                        })
                    }
                }
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => out.push((Tok::Op(c as char), start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b',' => out.push((Tok::Comma, start)),
            _ => {
                let ch = src[start..].chars().next().expect("in bounds");
                return Err(ExprError::Unexpected {
                    found: format!("character `{ch}`"),
                    offset: start,
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    /// Offsets of currently open parentheses.
    open: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ExprError {
        match self.peek() {
            Tok::End if !self.open.is_empty() => ExprError::Unbalanced {
                offset: *self.open.last().expect("non-empty"),
            },
            Tok::RParen if self.open.is_empty() => ExprError::Unbalanced { offset: self.offset() },
            t => ExprError::Unexpected {
                found: describe(t),
                offset: self.offset(),
            },
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.atom()?;
        while *self.peek() == Tok::Op('^') {
            self.bump();
            lhs = Expr::Bin(BinOp::Pow, Box::new(lhs), Box::new(self.atom()?));
        }
        Ok(lhs)
    }

    fn close(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Tok::RParen => {
                self.open.pop();
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                let (_, at) = self.bump();
                self.open.push(at);
                let e = self.sum()?;
                self.close()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let (_, at) = self.bump();
                let func = match name.as_str() {
                    "x" => return Ok(Expr::Var(Var::X)),
                    "y" => return Ok(Expr::Var(Var::Y)),
                    "z" => return Ok(Expr::Var(Var::Z)),
                    "pi" => return Ok(Expr::Pi),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => return Err(ExprError::UnknownIdentifier { name, offset: at }),
                };
                if *self.peek() != Tok::LParen {
                    return Err(ExprError::Arity { name, offset: at });
                }
                let (_, paren) = self.bump();
                if *self.peek() == Tok::RParen {
                    return Err(ExprError::Arity { name, offset: at });
                }
                self.open.push(paren);
                let arg = self.sum()?;
                if *self.peek() == Tok::Comma {
                    return Err(ExprError::Arity { name, offset: at });
                }
                self.close()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected()),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        open: Vec::new(),
    };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(e)
}

/// Evaluate at the nodes `(i/n, j/n, k/n)`.
pub fn eval_on_grid(e: &Expr, grid: Grid) -> Result<ScalarField, ExprError> {
    let field = ScalarField::from_fn(grid, |x, y, z| e.eval(x, y, z));
    if let Some(index) = field.values().iter().position(|v| !v.is_finite()) {
        let (i, j, k) = grid.unindex(index);
        return Err(ExprError::NonFinite {
            value: field.values()[index],
            index,
            i,
            j,
            k,
        });
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(print(&parse("2*pi*z").unwrap()), "((2*pi)*z)");
        assert_eq!(print(&parse("-x^2").unwrap()), "(-(x^2))");
        assert_eq!(print(&parse("1+0.2*cos(2*pi*x)").unwrap()), "(1+(0.2*cos(((2*pi)*x))))");
        assert_eq!(print(&parse("2^3^2").unwrap()), "((2^3)^2)");
        assert_eq!(print(&parse("x - y - z").unwrap()), "((x-y)-z)");
        assert_eq!(print(&parse("--x").unwrap()), "(-(-x))");
        assert_eq!(parse("2^3^2").unwrap().eval(0.0, 0.0, 0.0), 64.0);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("1e-3").unwrap(), Expr::Num(1e-3));
        assert_eq!(parse("2.5E+2").unwrap(), Expr::Num(250.0));
        assert!(matches!(parse("1.2.3"), Err(ExprError::Number { offset: 0, .. })));
        assert!(matches!(parse("1e999"), Err(ExprError::Number { .. })));
        // `2e` is the number 2 followed by an identifier
        assert!(matches!(parse("2e"), Err(ExprError::Unexpected { offset: 1, .. })));
    }

    #[test]
    fn error_offsets() {
        assert_eq!(
            parse("sin(w)"),
            Err(ExprError::UnknownIdentifier {
                name: "w".into(),
                offset: 4
            })
        );
        assert_eq!(parse("sin(").unwrap_err().offset(), Some(3));
        assert!(matches!(parse("sin("), Err(ExprError::Unbalanced { offset: 3 })));
        assert!(matches!(parse("(x"), Err(ExprError::Unbalanced { offset: 0 })));
        assert!(matches!(parse("x)"), Err(ExprError::Unbalanced { offset: 1 })));
        assert!(matches!(parse("sin(x, y)"), Err(ExprError::Arity { offset: 0, .. })));
        assert!(matches!(parse("cos()"), Err(ExprError::Arity { offset: 0, .. })));
        assert!(matches!(parse("2 + exp"), Err(ExprError::Arity { offset: 4, .. })));
        assert!(matches!(parse("x $ y"), Err(ExprError::Unexpected { offset: 2, .. })));
        assert!(matches!(parse(""), Err(ExprError::Unexpected { offset: 0, .. })));
    }

    #[test]
    fn grid_evaluation() {
        let g = Grid::new(32).unwrap();
        assert_eq!(eval_on_grid(&parse("0").unwrap(), g).unwrap().max_abs(), 0.0);
        let f = eval_on_grid(&parse("sin(2*pi*x)").unwrap(), g).unwrap();
        assert!((f.values()[g.index(8, 0, 0)] - 1.0).abs() < 1e-15);
        match eval_on_grid(&parse("1/ (x - x)").unwrap(), g) {
            Err(ExprError::NonFinite { index: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn uses_reports_variables() {
        let e = parse("0.3*sin(2*pi*z)").unwrap();
        assert!(e.uses(Var::Z));
        assert!(!e.uses(Var::X));
    }
}
