//! Scalar expressions in `t`: a tiny recursive-descent parser, a canonical
//! printer and an evaluator.
//!
//! Grammar (unary minus binds tighter than `*` and `/`):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | atom
//! atom    := number | 't' | 'pi' | func '(' sum ')' | '(' sum ')'
//! func    := 'sin' | 'cos' | 'eta'
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::{Error, Result};

const DIVISION_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Eta,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Eta => "eta",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => libm::sin(x),
            Func::Cos => libm::cos(x),
            Func::Eta => eta(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    Pi,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// C¹ ramp: 0 below 0, 1 above 1.
pub fn eta(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else if s < 1.0 {
        let w = libm::sin(2.0 * PI * s);
        s - (6.0 * w + w * w * w) / (12.0 * PI)
    } else {
        1.0
    }
}

pub fn eta_prime(s: f64) -> f64 {
    if (0.0..1.0).contains(&s) {
        let (w, c) = (libm::sin(2.0 * PI * s), libm::cos(2.0 * PI * s));
        1.0 - c - 0.5 * w * w * c
    } else {
        0.0
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Time => t,
            Expr::Pi => PI,
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Call(f, e) => f.apply(e.eval(t)?),
            Expr::Binary(op, a, b) => {
                let x = a.eval(t)?;
                let y = b.eval(t)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if libm::fabs(y) <= DIVISION_GUARD {
                            return Err(Error::DivisionByZero { t });
                        }
                        x / y
                    }
                }
            }
        })
    }

    /// Value and exact time derivative (forward-mode dual numbers).
    pub fn eval_dual(&self, t: f64) -> Result<(f64, f64)> {
        Ok(match self {
            Expr::Num(v) => (*v, 0.0),
            Expr::Time => (t, 1.0),
            Expr::Pi => (PI, 0.0),
            Expr::Neg(e) => {
                let (v, d) = e.eval_dual(t)?;
                (-v, -d)
            }
            Expr::Call(f, e) => {
                let (v, d) = e.eval_dual(t)?;
                match f {
                    Func::Sin => (libm::sin(v), libm::cos(v) * d),
                    Func::Cos => (libm::cos(v), -libm::sin(v) * d),
                    Func::Eta => (eta(v), eta_prime(v) * d),
                }
            }
            Expr::Binary(op, a, b) => {
                let (x, dx) = a.eval_dual(t)?;
                let (y, dy) = b.eval_dual(t)?;
                match op {
                    BinOp::Add => (x + y, dx + dy),
                    BinOp::Sub => (x - y, dx - dy),
                    BinOp::Mul => (x * y, dx * y + x * dy),
                    BinOp::Div => {
                        if libm::fabs(y) <= DIVISION_GUARD {
                            return Err(Error::DivisionByZero { t });
                        }
                        (x / y, (dx * y - x * dy) / (y * y))
                    }
                }
            }
        })
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(self.eval_dual(t)?.1)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 0,
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Time => f.write_str("t"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                wrapped(f, e, e.precedence() < 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                wrapped(f, a, a.precedence() < p)?;
                write!(f, "{}", op.symbol())?;
                wrapped(f, b, b.precedence() <= p)
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", ch as char)))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.error(&format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map(Expr::Num).map_err(|_| Error::Parse {
            pos: start,
            msg: format!("malformed number '{text}'"),
        })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let func = match name {
            "t" => return Ok(Expr::Time),
            "pi" => return Ok(Expr::Pi),
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "eta" => Func::Eta,
            _ => {
                return Err(Error::Parse { pos: start, msg: format!("unknown identifier '{name}'") })
            }
        };
        self.expect(b'(')?;
        let mut args: Vec<Expr> = Vec::new();
        if self.peek() != Some(b')') {
            args.push(self.sum()?);
            while self.peek() == Some(b',') {
                self.pos += 1;
                args.push(self.sum()?);
            }
        }
        self.expect(b')')?;
        if args.len() != 1 {
            return Err(Error::Parse {
                pos: start,
                msg: format!("{name} takes 1 argument, got {}", args.len()),
            });
        }
        Ok(Expr::Call(func, Box::new(args.pop().unwrap_or(Expr::Num(0.0)))))
    }
}

impl core::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}
