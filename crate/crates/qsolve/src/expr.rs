//! Arithmetic expressions in one variable, for potential definitions given
//! as text (`{"expr": "x^2", "support": [-4, 4]}`).
//!
//! Grammar, with the usual precedence (`^` binds tightest, associates to the
//! right, and unary minus binds looser than `^`, so `-x^2 = -(x^2)`):
//!
//! ```text
//! expr   := term   { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := ("+" | "-") factor | power
//! power  := atom [ "^" factor ]
//! atom   := number | "x" | "pi" | name "(" expr ")" | "(" expr ")"
//! name   := "exp" | "tanh" | "sin" | "cos" | "sqrt" | "abs"
//! ```
//!
//! Numbers are decimal literals with optional fraction and exponent parts.
//! Parse failures carry the 1-based character position of the offending
//! input, so callers can point at the exact spot in the source text.

use std::fmt;

/// A parsed expression; evaluation is a pure function of `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
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
    Exp,
    Tanh,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Expr {
    /// Evaluates the expression at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Tanh => v.tanh(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }
}

/// Parse failure at a 1-based character position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at position {}: {}",
            self.position, self.message
        )
    }
}

impl std::error::Error for ParseError {}

/// Parses a complete expression; trailing input is an error.
pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        chars: input.chars().collect(),
        pos: 0,
    };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(p.err(format!("unexpected '{c}'")));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    /// Error at the current position (1-based in the message).
    fn err(&self, message: String) -> ParseError {
        ParseError {
            position: self.pos + 1,
            message,
        }
    }

    fn err_at(&self, pos: usize, message: String) -> ParseError {
        ParseError {
            position: pos + 1,
            message,
        }
    }

    /// Next character past whitespace, leaving `pos` on it.
    fn peek(&mut self) -> Option<char> {
        while matches!(self.chars.get(self.pos), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, lhs.into(), self.term()?.into());
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, lhs.into(), self.factor()?.into());
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(self.factor()?.into()))
        } else if self.eat('+') {
            self.factor()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            // The exponent goes through `factor`, so `2^-3` parses and the
            // recursion makes `^` right-associative.
            Ok(Expr::Bin(BinOp::Pow, base.into(), self.factor()?.into()))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input".into())),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.name(),
            Some(c) => Err(self.err(format!("expected a value, got '{c}'"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while matches!(p.chars.get(p.pos), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if matches!(self.chars.get(self.pos), Some('.')) {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_digit()) {
                digits(self);
            } else {
                // Not an exponent part after all (e.g. `2e` or `3exp(x)`);
                // leave it for the caller, which will reject it clearly.
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.err_at(start, format!("invalid number '{text}'")))
    }

    fn name(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        let func = match name.as_str() {
            "x" => return Ok(Expr::Var),
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return Err(self.err_at(start, format!("unknown name '{name}'"))),
        };
        if !self.eat('(') {
            return Err(self.err(format!("expected '(' after '{name}'")));
        }
        let arg = self.expr()?;
        if !self.eat(')') {
            return Err(self.err("expected ')'".into()));
        }
        Ok(Expr::Call(func, arg.into()))
    }
}
