//! A small arithmetic expression language over one variable `x`.
//!
//! Grammar, loosest binding first: `+ -`, then `* /`, then unary
//! minus, then `^`. Binary operators of equal precedence associate to
//! the left. Calls are limited to a fixed catalog: sin, cos, exp,
//! log, abs, sqrt. Evaluation reports domain faults (division by
//! zero, log of a non-positive value, and friends) instead of letting
//! NaN propagate.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Number(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// An expression node with the byte span it was parsed from.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

// Equality is structural; spans are bookkeeping only.
impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Number(a), ExprKind::Number(b)) => a == b,
            (ExprKind::Var, ExprKind::Var) => true,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Binary(op, a, b), ExprKind::Binary(oq, c, d)) => {
                op == oq && a == c && b == d
            }
            (ExprKind::Call(f, a), ExprKind::Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Expr {
    fn new(kind: ExprKind, start: usize, end: usize) -> Expr {
        Expr {
            kind,
            span: Span { start, end },
        }
    }

    /// A synthetic literal, for expressions assembled in code.
    pub fn number(v: f64) -> Expr {
        Expr::new(ExprKind::Number(v), 0, 0)
    }

    /// The synthetic variable `x`.
    pub fn var() -> Expr {
        Expr::new(ExprKind::Var, 0, 0)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), 0, 0)
    }

    pub fn neg(inner: Expr) -> Expr {
        Expr::new(ExprKind::Neg(Box::new(inner)), 0, 0)
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::new(ExprKind::Call(func, Box::new(arg)), 0, 0)
    }

    /// The monomial `x^n`.
    pub fn var_power(n: u32) -> Expr {
        Expr::binary(BinOp::Pow, Expr::var(), Expr::number(n as f64))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} in `{fragment}`")]
pub struct EvalError {
    pub message: String,
    pub fragment: String,
    pub span: Span,
}

fn prec(kind: &ExprKind) -> u8 {
    match kind {
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

/// Renders an expression with the fewest parentheses that reparse to
/// the same tree; `pretty` composed with `parse` is a fixed point.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn write_expr(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Number(v) => out.push_str(&format!("{v}")),
        ExprKind::Var => out.push('x'),
        ExprKind::Neg(inner) => {
            out.push('-');
            write_child(inner, prec(&e.kind), false, out);
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let p = prec(&e.kind);
            write_child(lhs, p, false, out);
            out.push_str(match op {
                BinOp::Add => " + ",
                BinOp::Sub => " - ",
                BinOp::Mul => " * ",
                BinOp::Div => " / ",
                BinOp::Pow => "^",
            });
            write_child(rhs, p, true, out);
        }
        ExprKind::Call(func, arg) => {
            out.push_str(func.name());
            out.push('(');
            write_expr(arg, out);
            out.push(')');
        }
    }
}

fn write_child(child: &Expr, parent_prec: u8, right_operand: bool, out: &mut String) {
    let cp = prec(&child.kind);
    let needs_parens = cp < parent_prec || (right_operand && cp == parent_prec);
    if needs_parens {
        out.push('(');
        write_expr(child, out);
        out.push(')');
    } else {
        write_expr(child, out);
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            let start = self.pos;
            self.pos += 1;
            let inner = self.unary()?;
            let end = inner.span.end;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), start, end));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            let rhs = self.power_operand()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = Expr {
                kind: ExprKind::Binary(BinOp::Pow, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    // Exponents may carry a sign without parentheses: x^-2.
    fn power_operand(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            let start = self.pos;
            self.pos += 1;
            let inner = self.power_operand()?;
            let end = inner.span.end;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), start, end));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.error(&format!("unexpected character `{}`", c as char))),
            None => Err(self.error("expected an operand")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let slice = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let value: f64 = slice.parse().map_err(|_| ParseError {
            offset: start,
            message: format!("invalid number `{slice}`"),
        })?;
        Ok(Expr::new(ExprKind::Number(value), start, self.pos))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if name == "x" {
            return Ok(Expr::new(ExprKind::Var, start, self.pos));
        }
        let func = Func::from_name(name).ok_or(ParseError {
            offset: start,
            message: format!("unknown identifier `{name}`"),
        })?;
        if !self.eat(b'(') {
            return Err(self.error(&format!("expected `(` after `{name}`")));
        }
        let arg = self.sum()?;
        if !self.eat(b')') {
            return Err(self.error("expected `)`"));
        }
        Ok(Expr::new(
            ExprKind::Call(func, Box::new(arg)),
            start,
            self.pos,
        ))
    }
}

fn fault(e: &Expr, message: impl Into<String>) -> EvalError {
    EvalError {
        message: message.into(),
        fragment: pretty(e),
        span: e.span,
    }
}

fn ensure_finite(v: f64, e: &Expr) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(fault(e, "non-finite result"))
    }
}

pub fn eval(e: &Expr, x: f64) -> Result<f64, EvalError> {
    match &e.kind {
        ExprKind::Number(v) => Ok(*v),
        ExprKind::Var => Ok(x),
        ExprKind::Neg(inner) => Ok(-eval(inner, x)?),
        ExprKind::Binary(op, lhs, rhs) => {
            let a = eval(lhs, x)?;
            let b = eval(rhs, x)?;
            let v = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(fault(e, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => power(a, b, e)?,
            };
            ensure_finite(v, e)
        }
        ExprKind::Call(func, arg) => {
            let a = eval(arg, x)?;
            let v = match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(fault(e, "logarithm of a non-positive value"));
                    }
                    a.ln()
                }
                Func::Abs => a.abs(),
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(fault(e, "square root of a negative value"));
                    }
                    a.sqrt()
                }
            };
            ensure_finite(v, e)
        }
    }
}

// Real power with the sign of integer exponents handled explicitly;
// f64::powf would return NaN for every negative base.
fn power(base: f64, exponent: f64, e: &Expr) -> Result<f64, EvalError> {
    if base < 0.0 {
        if exponent.fract() != 0.0 {
            return Err(fault(e, "negative base raised to a non-integer power"));
        }
        let magnitude = (-base).powf(exponent);
        let odd = (exponent.abs() % 2.0) == 1.0;
        return Ok(if odd { -magnitude } else { magnitude });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(fault(e, "zero raised to a negative power"));
    }
    Ok(base.powf(exponent))
}
