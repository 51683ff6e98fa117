//! Tiny arithmetic expression language for user-defined coefficients.
//!
//! Grammar: infix `+ - * / ^` with usual precedence, unary minus, parentheses,
//! functions sin, cos, exp, sqrt, abs, constants pi and e, variable x.
//! Whitespace-insensitive. Parsed once into a tree, evaluated per sample.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Fun(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(Error::Config(format!(
                "unexpected trailing input at position {} in expression {text:?}",
                p.pos
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Fun(f, e) => {
                let v = e.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                '-' => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                '/' => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if self.peek() == Some('+') {
            self.bump();
            return self.factor();
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.bump();
            // right-associative
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::Config("missing closing parenthesis".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::Config(format!("unexpected token {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '.' {
                self.bump();
            } else if (c == 'e' || c == 'E')
                && self
                    .chars
                    .get(self.pos + 1)
                    .is_some_and(|&d| d.is_ascii_digit() || d == '+' || d == '-')
            {
                self.bump();
                if matches!(self.peek(), Some('+') | Some('-')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Config(format!("bad number {text:?}")))
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.bump();
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match name.as_str() {
            "x" => Ok(Expr::Var),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            "sin" | "cos" | "exp" | "sqrt" | "abs" => {
                if self.bump() != Some('(') {
                    return Err(Error::Config(format!("{name} expects parentheses")));
                }
                let arg = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::Config("missing closing parenthesis".into()));
                }
                let f = match name.as_str() {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "sqrt" => Func::Sqrt,
                    _ => Func::Abs,
                };
                Ok(Expr::Fun(f, Box::new(arg)))
            }
            _ => Err(Error::Config(format!("unknown identifier {name:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("sin(x) + 60/(1+x^2)").unwrap();
        let x = 0.7;
        assert!((e.eval(x) - (x.sin() + 60.0 / (1.0 + x * x))).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_unary() {
        let e = Expr::parse("-2*x^2 + 3").unwrap();
        assert!((e.eval(2.0) - (-8.0 + 3.0)).abs() < 1e-15);
        let e = Expr::parse("2^3^1").unwrap();
        assert!((e.eval(0.0) - 8.0).abs() < 1e-15);
    }

    #[test]
    fn constants_and_functions() {
        let e = Expr::parse("cos(pi) + exp(0) + sqrt(4) + abs(-3)").unwrap();
        assert!((e.eval(0.0) - (-1.0f64 + 1.0 + 2.0 + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn whitespace_insensitive() {
        let a = Expr::parse(" 1 + 2 * x ").unwrap();
        let b = Expr::parse("1+2*x").unwrap();
        assert_eq!(a.eval(3.0), b.eval(3.0));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("(1").is_err());
    }
}
