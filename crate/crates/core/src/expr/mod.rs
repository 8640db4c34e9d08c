//! A small expression language for coefficient functions.
//!
//! Expressions are parsed against an ordered list of coordinate names and
//! store variables by index, so an expression written over the base
//! coordinates of a fibration is also valid over the total chart (base
//! coordinates come first).
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := "-" factor | atom ("^" integer)? ;
//! atom   := number | ident | ident "(" expr ("," expr)? ")" | "(" expr ")" ;
//! ```

mod diff;
mod parser;
mod print;

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};

pub use parser::parse;
pub use print::pretty_print;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan2,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Atan2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan2 => "atan2",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expression tree. `Num` literals are finite and non-negative; negative
/// constants are `Neg(Num(..))`, which is also what the parser produces.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
}

// Builders with light constant folding (identities with 0 and 1 only).
impl Expr {
    pub fn num(c: f64) -> Expr {
        if c < 0.0 {
            Expr::Neg(Box::new(Expr::Num(-c)))
        } else {
            Expr::Num(c)
        }
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Num(c) => Some(*c),
            Expr::Neg(e) => e.as_const().map(|c| -c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            b
        } else if b.is_zero() {
            a
        } else {
            Expr::Add(Box::new(a), Box::new(b))
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            a
        } else if a.is_zero() {
            Expr::neg(b)
        } else {
            Expr::Sub(Box::new(a), Box::new(b))
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            Expr::Num(0.0)
        } else if a.is_one() {
            b
        } else if b.is_one() {
            a
        } else {
            Expr::Mul(Box::new(a), Box::new(b))
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            Expr::Num(0.0)
        } else if b.is_one() {
            a
        } else {
            Expr::Div(Box::new(a), Box::new(b))
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(c) if c == 0.0 => Expr::Num(0.0),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::Num(1.0),
            1 => a,
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(args.len(), f.arity());
        Expr::Call(f, args)
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .fold(Expr::Num(0.0), Expr::add)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Neg(a) | Expr::Pow(a, _) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Expr::Call(_, args) => args.iter().any(|e| e.depends_on(var)),
        }
    }

    /// Renumbers every variable `i` to `i + offset` (used to move fiber
    /// expressions into a total chart).
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.map_vars(&|i| i + offset)
    }

    pub fn map_vars(&self, f: &dyn Fn(usize) -> usize) -> Expr {
        let bx = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var(i) => Expr::Var(f(*i)),
            Expr::Neg(a) => Expr::Neg(bx(a)),
            Expr::Add(a, b) => Expr::Add(bx(a), bx(b)),
            Expr::Sub(a, b) => Expr::Sub(bx(a), bx(b)),
            Expr::Mul(a, b) => Expr::Mul(bx(a), bx(b)),
            Expr::Div(a, b) => Expr::Div(bx(a), bx(b)),
            Expr::Pow(a, n) => Expr::Pow(bx(a), *n),
            Expr::Call(g, args) => Expr::Call(*g, args.iter().map(|e| e.map_vars(f)).collect()),
        }
    }

    /// Plain value at a point.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval_jet(point, 0)?.value())
    }

    /// Value and partial derivatives up to `order` by forward propagation.
    pub fn eval_jet(&self, point: &[f64], order: u8) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(Error::OrderExceeded {
                requested: order,
                available: MAX_ORDER,
            });
        }
        if let Some(v) = self.max_var() {
            if v >= point.len() {
                return Err(Error::Dimension(format!(
                    "expression uses coordinate {v} but the point has {} components",
                    point.len()
                )));
            }
        }
        self.jet(point, order)
    }

    fn jet(&self, p: &[f64], order: u8) -> Result<Jet> {
        let dim = p.len();
        Ok(match self {
            Expr::Num(c) => Jet::constant(dim, order, *c),
            Expr::Var(i) => Jet::variable(dim, order, *i, p[*i]),
            Expr::Neg(a) => -a.jet(p, order)?,
            Expr::Add(a, b) => a.jet(p, order)? + b.jet(p, order)?,
            Expr::Sub(a, b) => a.jet(p, order)? - b.jet(p, order)?,
            Expr::Mul(a, b) => a.jet(p, order)? * b.jet(p, order)?,
            Expr::Div(a, b) => {
                let den = b.jet(p, order)?;
                if den.value() == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.jet(p, order)? * den.recip()
            }
            Expr::Pow(a, n) => {
                let base = a.jet(p, order)?;
                if *n < 0 && base.value() == 0.0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                base.powi(*n)
            }
            Expr::Call(f, args) => {
                let x = args[0].jet(p, order)?;
                let v = x.value();
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => {
                        if v.cos().abs() < 1e-300 {
                            return Err(Error::Domain("tan at a pole".into()));
                        }
                        x.tan()
                    }
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(Error::Domain(format!("log of non-positive value {v}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 || (v == 0.0 && order > 0) {
                            return Err(Error::Domain(format!("sqrt of {v}")));
                        }
                        x.sqrt()
                    }
                    Func::Atan2 => {
                        let y = args[1].jet(p, order)?;
                        if v == 0.0 && y.value() == 0.0 {
                            return Err(Error::Domain("atan2(0, 0)".into()));
                        }
                        x.atan2(&y)
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn product_jet() {
        let e = parse("x*y", &coords(&["x", "y"])).unwrap();
        let j = e.eval_jet(&[2.0, 3.0], 1).unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.gradient().unwrap(), &[3.0, 2.0]);
    }

    #[test]
    fn sine_taylor_at_origin() {
        let e = parse("sin(x)", &coords(&["x"])).unwrap();
        let j = e.eval_jet(&[0.0], 2).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.partial(0).unwrap(), 1.0);
        assert_eq!(j.second_partial(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn rational_matches_central_differences() {
        let c = coords(&["x", "y"]);
        let e = parse("x/(1+x^2+y^2)", &c).unwrap();
        let j = e.eval_jet(&[1.0, 1.0], 1).unwrap();
        let h = 1e-5;
        let f = |x: f64, y: f64| e.eval(&[x, y]).unwrap();
        let fx = (f(1.0 + h, 1.0) - f(1.0 - h, 1.0)) / (2.0 * h);
        let fy = (f(1.0, 1.0 + h) - f(1.0, 1.0 - h)) / (2.0 * h);
        assert!((j.partial(0).unwrap() - fx).abs() < 1e-6);
        assert!((j.partial(1).unwrap() - fy).abs() < 1e-6);
        // closed form: d/dx = (1 - x^2 + y^2)/(1+x^2+y^2)^2 = 1/9, d/dy = -2xy/9 = -2/9
        assert!((j.partial(0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((j.partial(1).unwrap() + 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let c = coords(&["x"]);
        for src in ["sqrt(x)", "log(x)", "1/x", "x^-1"] {
            let e = parse(src, &c).unwrap();
            assert!(
                matches!(e.eval_jet(&[-0.0], 1), Err(Error::Domain(_))),
                "{src}"
            );
        }
        let e = parse("sqrt(x)", &c).unwrap();
        assert!(matches!(e.eval_jet(&[-1.0], 0), Err(Error::Domain(_))));
    }

    #[test]
    fn order_three_is_rejected() {
        let e = parse("x", &coords(&["x"])).unwrap();
        assert_eq!(
            e.eval_jet(&[1.0], 3),
            Err(Error::OrderExceeded {
                requested: 3,
                available: 2
            })
        );
    }

    #[test]
    fn evaluation_is_bitwise_deterministic() {
        let c = coords(&["x", "y"]);
        let e = parse("atan2(y, x)*exp(sin(x*y)) - sqrt(1 + x^2)/(2 + cos(y))", &c).unwrap();
        let a = e.eval_jet(&[0.31, -1.7], 2).unwrap();
        let b = e.eval_jet(&[0.31, -1.7], 2).unwrap();
        assert_eq!(a, b);
    }
}
