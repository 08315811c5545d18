//! Small arithmetic expression language used by config files.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, coordinate names,
//! named parameters, and the functions `min max abs exp log sqrt sin cos`.
//! Evaluation carries a gradient alongside the value (forward mode).

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Abs,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "min" => Func::Min,
            "max" => Func::Max,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Func::Min | Func::Max => n >= 2,
            _ => n == 1,
        }
    }
}

/// Names visible to the parser: coordinates map to state indices, parameters
/// are substituted as constants.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub coords: Vec<String>,
    pub params: HashMap<String, f64>,
}

impl Scope {
    pub fn new(coords: &[&str]) -> Self {
        Scope {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            params: HashMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("bad number '{text}'"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    scope: &'a Scope,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.len)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    // right associative, binds tighter than unary minus: -x^2 = -(x^2)
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let Some(f) = Func::from_name(&name) else {
                        return self.err(format!("unknown function '{name}'"));
                    };
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    if !f.arity_ok(args.len()) {
                        return self.err(format!("wrong number of arguments to {name}"));
                    }
                    return Ok(Expr::Call(f, args));
                }
                if let Some(i) = self.scope.coords.iter().position(|c| *c == name) {
                    Ok(Expr::Var(i))
                } else if let Some(v) = self.scope.params.get(&name) {
                    Ok(Expr::Num(*v))
                } else if name == "pi" {
                    Ok(Expr::Num(std::f64::consts::PI))
                } else {
                    self.err(format!("unknown name '{name}'"))
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            _ => self.err("expected a number, name or '('"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str, scope: &Scope) -> Result<Expr> {
        let toks = lex(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            scope,
            len: src.len(),
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let v: Vec<f64> = args.iter().map(|a| a.eval(x)).collect();
                match f {
                    Func::Min => v.iter().cloned().fold(f64::INFINITY, f64::min),
                    Func::Max => v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    Func::Abs => v[0].abs(),
                    Func::Exp => v[0].exp(),
                    Func::Log => v[0].ln(),
                    Func::Sqrt => v[0].sqrt(),
                    Func::Sin => v[0].sin(),
                    Func::Cos => v[0].cos(),
                }
            }
        }
    }

    /// Value and gradient with respect to the state.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let n = x.len();
        match self {
            Expr::Num(v) => (*v, vec![0.0; n]),
            Expr::Var(i) => {
                let mut g = vec![0.0; n];
                g[*i] = 1.0;
                (x[*i], g)
            }
            Expr::Neg(a) => {
                let (v, g) = a.eval_grad(x);
                (-v, g.into_iter().map(|d| -d).collect())
            }
            Expr::Bin(op, a, b) => {
                let (u, du) = a.eval_grad(x);
                let (w, dw) = b.eval_grad(x);
                match op {
                    Op::Add => (u + w, zip(&du, &dw, |p, q| p + q)),
                    Op::Sub => (u - w, zip(&du, &dw, |p, q| p - q)),
                    Op::Mul => (u * w, zip(&du, &dw, |p, q| p * w + u * q)),
                    Op::Div => (u / w, zip(&du, &dw, |p, q| (p * w - u * q) / (w * w))),
                    Op::Pow => {
                        let v = u.powf(w);
                        let const_exp = dw.iter().all(|d| *d == 0.0);
                        let g = if const_exp {
                            let c = if w == 0.0 { 0.0 } else { w * u.powf(w - 1.0) };
                            du.iter().map(|p| c * p).collect()
                        } else {
                            let lu = u.ln();
                            zip(&du, &dw, |p, q| v * (q * lu + w * p / u))
                        };
                        (v, g)
                    }
                }
            }
            Expr::Call(f, args) => {
                let parts: Vec<(f64, Vec<f64>)> = args.iter().map(|a| a.eval_grad(x)).collect();
                match f {
                    Func::Min => pick(parts, |a, b| a < b),
                    Func::Max => pick(parts, |a, b| a > b),
                    _ => {
                        let (u, du) = &parts[0];
                        let (v, d) = match f {
                            Func::Abs => (u.abs(), if *u < 0.0 { -1.0 } else { 1.0 }),
                            Func::Exp => (u.exp(), u.exp()),
                            Func::Log => (u.ln(), 1.0 / u),
                            Func::Sqrt => (u.sqrt(), 0.5 / u.sqrt()),
                            Func::Sin => (u.sin(), u.cos()),
                            Func::Cos => (u.cos(), -u.sin()),
                            Func::Min | Func::Max => unreachable!(),
                        };
                        (v, du.iter().map(|p| d * p).collect())
                    }
                }
            }
        }
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| f(*p, *q)).collect()
}

fn pick(parts: Vec<(f64, Vec<f64>)>, better: impl Fn(f64, f64) -> bool) -> (f64, Vec<f64>) {
    let mut it = parts.into_iter();
    let mut best = it.next().expect("arity checked");
    for p in it {
        if better(p.0, best.0) {
            best = p;
        }
    }
    best
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    Op::Add => "+",
                    Op::Sub => "-",
                    Op::Mul => "*",
                    Op::Div => "/",
                    Op::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope() -> Scope {
        Scope::new(&["x1", "x2"]).with_param("gamma", 2.0)
    }

    #[test]
    fn precedence() {
        let e = Expr::parse("1 + 2 * x1 ^ 2 - -x2", &scope()).unwrap();
        assert_eq!(e.eval(&[3.0, 4.0]), 1.0 + 18.0 + 4.0);
        let e = Expr::parse("-x1^2", &scope()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0]), -9.0);
        let e = Expr::parse("2^3^2", &scope()).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]), 512.0);
    }

    #[test]
    fn params_and_functions() {
        let e = Expr::parse("max(x1, gamma) + min(1, 2, -3) + abs(-1.5e0)", &scope()).unwrap();
        assert_eq!(e.eval(&[1.0, 0.0]), 2.0 - 3.0 + 1.5);
        assert!(Expr::parse("foo(x1)", &scope()).is_err());
        assert!(Expr::parse("x3", &scope()).is_err());
        assert!(Expr::parse("x1 +", &scope()).is_err());
        assert!(Expr::parse("max(x1)", &scope()).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let srcs = [
            "2*x1 + x2^2 - 9",
            "exp(x1) * sin(x2) / (1 + x1^2)",
            "sqrt(x1^2 + x2^2 + 1) - log(2 + x2)",
            "x1^x2",
        ];
        let x = [0.7, 1.3];
        for s in srcs {
            let e = Expr::parse(s, &scope()).unwrap();
            let (_, g) = e.eval_grad(&x);
            for i in 0..2 {
                let h = 1e-6;
                let mut a = x;
                let mut b = x;
                a[i] += h;
                b[i] -= h;
                let fd = (e.eval(&a) - e.eval(&b)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "{s}: d/dx{i} {fd} vs {}", g[i]);
            }
        }
    }
}
