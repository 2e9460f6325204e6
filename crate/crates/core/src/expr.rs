//! A small arithmetic expression language in one variable `x`, evaluated
//! with truncated Taylor jets so that the first three derivatives come out
//! exactly (forward mode).
//!
//! Grammar: `+ - * / ^`, parentheses, numbers, the constants `pi` and `e`,
//! and the functions `sin cos sinh cosh tanh exp ln sqrt`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcspace::{real_fn, GeneratorFunction};

/// Value and first three derivatives of a function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0, d3: 0.0 }
    }

    pub fn variable(x: f64) -> Self {
        Self { v: x, d1: 1.0, d2: 0.0, d3: 0.0 }
    }

    fn is_constant(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0 && self.d3 == 0.0
    }

    /// h∘self given h and its first three derivatives at self.v.
    fn compose(self, h: [f64; 4]) -> Self {
        let (g1, g2, g3) = (self.d1, self.d2, self.d3);
        Self {
            v: h[0],
            d1: h[1] * g1,
            d2: h[2] * g1 * g1 + h[1] * g2,
            d3: h[3] * g1 * g1 * g1 + 3.0 * h[2] * g1 * g2 + h[1] * g3,
        }
    }

    pub fn recip(self) -> Self {
        let u = self.v;
        let r = 1.0 / u;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose([e; 4])
    }

    pub fn ln(self) -> Self {
        let u = self.v;
        self.compose([u.ln(), 1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)])
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let s2 = 1.0 - t * t;
        self.compose([t, s2, -2.0 * t * s2, s2 * (6.0 * t * t - 2.0)])
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    /// self^c for a constant exponent.
    pub fn powf(self, c: f64) -> Self {
        let u = self.v;
        let p = |k: f64| {
            let e = c - k;
            // the matching coefficient vanishes for small integer c
            if c.fract() == 0.0 && c >= 0.0 && c < k {
                return 0.0;
            }
            if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
                u.powi(e as i32)
            } else {
                u.powf(e)
            }
        };
        self.compose([p(0.0), c * p(1.0), c * (c - 1.0) * p(2.0), c * (c - 1.0) * (c - 2.0) * p(3.0)])
    }

    pub fn pow(self, exponent: Jet) -> Self {
        if exponent.is_constant() {
            self.powf(exponent.v)
        } else {
            (exponent * self.ln()).exp()
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2, d3: self.d3 + o.d3 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2, d3: self.d3 - o.d3 }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2, d3: -self.d3 }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.v * o.d3,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        if o.is_constant() {
            let r = 1.0 / o.v;
            Jet { v: self.v * r, d1: self.d1 * r, d2: self.d2 * r, d3: self.d3 * r }
        } else {
            self * o.recip()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, j: Jet) -> Jet {
        match self {
            Func::Sin => j.sin(),
            Func::Cos => j.cos(),
            Func::Sinh => j.sinh(),
            Func::Cosh => j.cosh(),
            Func::Tanh => j.tanh(),
            Func::Exp => j.exp(),
            Func::Ln => j.ln(),
            Func::Sqrt => j.sqrt(),
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!("unexpected {:?} after end of expression", p.tokens[p.pos])));
        }
        Ok(e)
    }

    pub fn jet(&self, x: f64) -> Jet {
        match self {
            Expr::Num(v) => Jet::constant(*v),
            Expr::X => Jet::variable(x),
            Expr::Neg(a) => -a.jet(x),
            Expr::Add(a, b) => a.jet(x) + b.jet(x),
            Expr::Sub(a, b) => a.jet(x) - b.jet(x),
            Expr::Mul(a, b) => a.jet(x) * b.jet(x),
            Expr::Div(a, b) => a.jet(x) / b.jet(x),
            Expr::Pow(a, b) => a.jet(x).pow(b.jet(x)),
            Expr::Call(f, a) => f.apply(a.jet(x)),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x).v
    }

    /// Wraps the expression as a generator with exact derivatives.
    pub fn into_generator(self, scale_hint: f64) -> GeneratorFunction {
        let label = self.to_string();
        let e = Arc::new(self);
        let (a, b, c, d) = (e.clone(), e.clone(), e.clone(), e);
        GeneratorFunction::make_analytic(
            real_fn(move |x| a.jet(x).v),
            real_fn(move |x| b.jet(x).d1),
            real_fn(move |x| c.jet(x).d2),
            real_fn(move |x| d.jet(x).d3),
            scale_hint,
            label,
        )
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => write!(f, "x"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Token::Op(c));
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part: 1e-3, 2.5E+4
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| Error::Expression(format!("bad number '{text}'")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(Error::Expression(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Expr::Add(lhs.into(), rhs.into()) } else { Expr::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Expr::Mul(lhs.into(), rhs.into()) } else { Expr::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(self.unary()?.into()))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(base.into(), exponent.into()));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Expression("missing ')'".into())),
                }
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::X),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "e" => Ok(Expr::Num(std::f64::consts::E)),
                _ => {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| Error::Expression(format!("unknown identifier '{name}'")))?;
                    if self.next() != Some(Token::LParen) {
                        return Err(Error::Expression(format!("expected '(' after {name}")));
                    }
                    let arg = self.expr()?;
                    if self.next() != Some(Token::RParen) {
                        return Err(Error::Expression(format!("missing ')' after {name} argument")));
                    }
                    Ok(Expr::Call(func, arg.into()))
                }
            },
            Some(t) => Err(Error::Expression(format!("unexpected token {t:?}"))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }
}
