//! A small calculator language for coefficients, delays, kernels and
//! closed-form characteristic solutions.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 't' | 'theta' | func '(' sum ')' | '(' sum ')'
//! func    := exp | ln | sin | cos | sqrt | abs
//! ```
//!
//! `^` binds tighter than unary minus (`-2^2 == -4`) and is right
//! associative (`2^3^2 == 2^9`). Numbers are decimal with an optional
//! exponent (`1`, `0.25`, `.5`, `3e-4`).

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    pub message: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    MissingBinding(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} is undefined at {arg}")]
    Domain { func: &'static str, arg: Complex64 },
    #[error("non-integer power {exponent} of negative base {base}")]
    NegativeBase { base: f64, exponent: Complex64 },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    Theta,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::T => "t",
            Var::Theta => "theta",
        })
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    const ALL: [Func; 6] = [Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Sqrt, Func::Abs];

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression in the variables `t` and `theta`.
///
/// Immutable once parsed; `Display` prints a fully parenthesized form that
/// parses back to the same tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let mut parser = Parser { src: source, pos: 0 };
        let root = parser.sum()?;
        parser.skip_ws();
        if parser.pos < source.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Expression { root })
    }

    pub fn constant(value: f64) -> Self {
        Expression { root: Node::Const(value) }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn uses(&self, var: Var) -> bool {
        fn walk(node: &Node, var: Var) -> bool {
            match node {
                Node::Const(_) => false,
                Node::Var(v) => *v == var,
                Node::Neg(a) | Node::Call(_, a) => walk(a, var),
                Node::Binary(_, a, b) => walk(a, var) || walk(b, var),
            }
        }
        walk(&self.root, var)
    }

    /// Value if the expression has no free variables.
    pub fn as_constant(&self) -> Option<Complex64> {
        if self.uses(Var::T) || self.uses(Var::Theta) {
            return None;
        }
        self.evaluate(0.0, None).ok()
    }

    pub fn evaluate(&self, t: f64, theta: Option<f64>) -> Result<Complex64, EvalError> {
        let v = eval(&self.root, t, theta)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluates and discards the imaginary part, which is zero for every
    /// expression the grammar can produce from real bindings.
    pub fn evaluate_real(&self, t: f64, theta: Option<f64>) -> Result<f64, EvalError> {
        self.evaluate(t, theta).map(|z| z.re)
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

fn write_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        // `{:?}` is the shortest representation that round-trips.
        Node::Const(c) => write!(f, "{c:?}"),
        Node::Var(v) => write!(f, "{v}"),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(a, f)?;
            f.write_str(")")
        }
        Node::Binary(op, a, b) => {
            f.write_str("(")?;
            write_node(a, f)?;
            write!(f, " {} ", op.symbol())?;
            write_node(b, f)?;
            f.write_str(")")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, f)?;
            f.write_str(")")
        }
    }
}

fn eval(node: &Node, t: f64, theta: Option<f64>) -> Result<Complex64, EvalError> {
    Ok(match node {
        Node::Const(c) => Complex64::new(*c, 0.0),
        Node::Var(Var::T) => Complex64::new(t, 0.0),
        Node::Var(Var::Theta) => Complex64::new(theta.ok_or(EvalError::MissingBinding(Var::Theta))?, 0.0),
        Node::Neg(a) => -eval(a, t, theta)?,
        Node::Binary(op, a, b) => {
            let x = eval(a, t, theta)?;
            let y = eval(b, t, theta)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == Complex64::new(0.0, 0.0) {
                        return Err(EvalError::DivisionByZero);
                    }
                    x / y
                }
                BinOp::Pow => power(x, y)?,
            }
        }
        Node::Call(func, a) => {
            let x = eval(a, t, theta)?;
            let is_real = x.im == 0.0;
            match func {
                Func::Exp => x.exp(),
                Func::Ln => {
                    if is_real && x.re <= 0.0 {
                        return Err(EvalError::Domain { func: "ln", arg: x });
                    }
                    if is_real {
                        Complex64::new(x.re.ln(), 0.0)
                    } else {
                        x.ln()
                    }
                }
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Sqrt => {
                    if is_real && x.re < 0.0 {
                        return Err(EvalError::Domain { func: "sqrt", arg: x });
                    }
                    if is_real {
                        Complex64::new(x.re.sqrt(), 0.0)
                    } else {
                        x.sqrt()
                    }
                }
                Func::Abs => Complex64::new(x.norm(), 0.0),
            }
        }
    })
}

fn power(base: Complex64, exponent: Complex64) -> Result<Complex64, EvalError> {
    if base.im != 0.0 {
        return Ok(base.powc(exponent));
    }
    let b = base.re;
    if exponent.im == 0.0 {
        let e = exponent.re;
        if b == 0.0 && e < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        if b < 0.0 && e.fract() != 0.0 {
            return Err(EvalError::NegativeBase { base: b, exponent });
        }
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return Ok(Complex64::new(b.powi(e as i32), 0.0));
        }
        return Ok(Complex64::new(b.powf(e), 0.0));
    }
    if b < 0.0 {
        return Err(EvalError::NegativeBase { base: b, exponent });
    }
    if b == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    Ok((exponent * b.ln()).exp())
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { message: message.into(), position: self.pos }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected character `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        let mut mantissa = digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            mantissa += digits(&mut p);
        }
        if mantissa == 0 {
            return Err(self.error("malformed number"));
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) == 0 {
                self.pos = q;
                return Err(self.error("malformed exponent"));
            }
            p = q;
        }
        let text = &self.src[start..p];
        let value: f64 = text.parse().map_err(|_| self.error("malformed number"))?;
        if !value.is_finite() {
            return Err(self.error("numeric literal out of range"));
        }
        self.pos = p;
        Ok(Node::Const(value))
    }

    fn identifier(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let name = &rest[..len];
        match name {
            "t" => {
                self.pos += len;
                Ok(Node::Var(Var::T))
            }
            "theta" => {
                self.pos += len;
                Ok(Node::Var(Var::Theta))
            }
            _ => match Func::from_name(name) {
                Some(func) => {
                    self.pos += len;
                    self.expect('(')?;
                    let arg = self.sum()?;
                    self.expect(')')?;
                    Ok(Node::Call(func, Box::new(arg)))
                }
                None => Err(ParseError { message: format!("unknown identifier `{name}`"), position: start }),
            },
        }
    }
}
