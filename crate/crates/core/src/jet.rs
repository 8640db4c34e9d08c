//! Truncated Taylor jets: a value together with its first and second partial
//! derivatives with respect to the coordinates of a chart.
//!
//! Arithmetic between jets of different orders truncates to the smaller order.
//! Differentiating a jet of order `r` yields a jet of order `r - 1`; asking for
//! a derivative of an order-0 jet is an [`Error::OrderExceeded`].

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Highest derivative order carried by any jet.
pub const MAX_ORDER: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: u8,
    dim: usize,
    value: f64,
    grad: Vec<f64>,
    /// Row-major `dim x dim`, symmetric. Empty below order 2.
    hess: Vec<f64>,
}

impl Jet {
    pub fn constant(dim: usize, order: u8, value: f64) -> Self {
        Jet {
            order,
            dim,
            value,
            grad: if order >= 1 { vec![0.0; dim] } else { Vec::new() },
            hess: if order >= 2 {
                vec![0.0; dim * dim]
            } else {
                Vec::new()
            },
        }
    }

    pub fn zero(dim: usize, order: u8) -> Self {
        Self::constant(dim, order, 0.0)
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(dim: usize, order: u8, index: usize, value: f64) -> Self {
        let mut j = Self::constant(dim, order, value);
        if order >= 1 {
            j.grad[index] = 1.0;
        }
        j
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> Option<&[f64]> {
        (self.order >= 1).then_some(self.grad.as_slice())
    }

    pub fn hessian(&self) -> Option<&[f64]> {
        (self.order >= 2).then_some(self.hess.as_slice())
    }

    /// First partial `d/dx_i`; zero-order jets report `OrderExceeded`.
    pub fn partial(&self, i: usize) -> Result<f64> {
        self.need(1)?;
        Ok(self.grad[i])
    }

    pub fn second_partial(&self, i: usize, j: usize) -> Result<f64> {
        self.need(2)?;
        Ok(self.hess[i * self.dim + j])
    }

    fn need(&self, order: u8) -> Result<()> {
        if self.order < order {
            Err(Error::OrderExceeded {
                requested: order,
                available: self.order,
            })
        } else {
            Ok(())
        }
    }

    /// The jet of `d/dx_i` of this function, one order lower.
    pub fn derivative(&self, i: usize) -> Result<Jet> {
        self.need(1)?;
        let order = self.order - 1;
        let mut out = Jet::constant(self.dim, order, self.grad[i]);
        if order >= 1 {
            out.grad
                .copy_from_slice(&self.hess[i * self.dim..(i + 1) * self.dim]);
        }
        Ok(out)
    }

    pub fn truncate(&self, order: u8) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let mut j = self.clone();
        j.order = order;
        if order < 2 {
            j.hess.clear();
        }
        if order < 1 {
            j.grad.clear();
        }
        j
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut j = self.clone();
        j.value *= c;
        j.grad.iter_mut().for_each(|g| *g *= c);
        j.hess.iter_mut().for_each(|h| *h *= c);
        j
    }

    /// `self += c * a * b`, truncating to the smallest order involved.
    pub fn add_product(&mut self, c: f64, a: &Jet, b: &Jet) {
        debug_assert_eq!(a.dim, b.dim);
        let order = self.order.min(a.order).min(b.order);
        self.lower_to(order);
        let n = self.dim;
        self.value += c * a.value * b.value;
        if order >= 1 {
            for i in 0..n {
                self.grad[i] += c * (a.value * b.grad[i] + b.value * a.grad[i]);
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    self.hess[k] += c
                        * (a.value * b.hess[k]
                            + b.value * a.hess[k]
                            + a.grad[i] * b.grad[j]
                            + a.grad[j] * b.grad[i]);
                }
            }
        }
    }

    /// `self += c * a`.
    pub fn add_scaled(&mut self, c: f64, a: &Jet) {
        let order = self.order.min(a.order);
        self.lower_to(order);
        self.value += c * a.value;
        for (g, x) in self.grad.iter_mut().zip(&a.grad) {
            *g += c * x;
        }
        for (h, x) in self.hess.iter_mut().zip(&a.hess) {
            *h += c * x;
        }
    }

    fn lower_to(&mut self, order: u8) {
        if order < self.order {
            *self = self.truncate(order);
        }
    }

    /// Composition `f(self)` given `f`, `f'` and `f''` at the current value.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let n = self.dim;
        let mut out = Jet::constant(n, self.order, f0);
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = f1 * self.grad[i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    out.hess[k] = f1 * self.hess[k] + f2 * self.grad[i] * self.grad[j];
                }
            }
        }
        out
    }

    /// Composition `f(a, b)` given the value, the two first partials
    /// `(fa, fb)` and the second partials `(faa, fab, fbb)`.
    pub fn chain2(a: &Jet, b: &Jet, f0: f64, d1: (f64, f64), d2: (f64, f64, f64)) -> Jet {
        let (fa, fb) = d1;
        let (faa, fab, fbb) = d2;
        let n = a.dim;
        let order = a.order.min(b.order);
        let mut out = Jet::constant(n, order, f0);
        if order >= 1 {
            for i in 0..n {
                out.grad[i] = fa * a.grad[i] + fb * b.grad[i];
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    out.hess[k] = fa * a.hess[k]
                        + fb * b.hess[k]
                        + faa * a.grad[i] * a.grad[j]
                        + fbb * b.grad[i] * b.grad[j]
                        + fab * (a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j]);
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn powi(&self, n: i32) -> Jet {
        let v = self.value;
        match n {
            0 => Jet::constant(self.dim, self.order, 1.0),
            1 => self.clone(),
            _ => {
                let nf = n as f64;
                self.chain(
                    v.powi(n),
                    nf * v.powi(n - 1),
                    nf * (nf - 1.0) * v.powi(n - 2),
                )
            }
        }
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Jet {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    /// `atan2(self, x)` with the usual quadrant convention.
    pub fn atan2(&self, x: &Jet) -> Jet {
        let (a, b) = (self.value, x.value);
        let r2 = a * a + b * b;
        let r4 = r2 * r2;
        Jet::chain2(
            self,
            x,
            a.atan2(b),
            (b / r2, -a / r2),
            (-2.0 * a * b / r4, (a * a - b * b) / r4, 2.0 * a * b / r4),
        )
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert_eq!(self.dim, other.dim);
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        out.value = f(self.value, other.value);
        for (o, x) in out.grad.iter_mut().zip(&other.grad) {
            *o = f(*o, *x);
        }
        for (o, x) in out.hess.iter_mut().zip(&other.hess) {
            *o = f(*o, *x);
        }
        out
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut out = Jet::zero(self.dim, self.order.min(rhs.order));
        out.add_product(1.0, self, rhs);
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.add_scaled(1.0, rhs);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.add_scaled(-1.0, rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Jet::variable(2, 2, 0, 2.0);
        let y = Jet::variable(2, 2, 1, 3.0);
        let p = &x * &y;
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.gradient().unwrap(), &[3.0, 2.0]);
        assert_eq!(p.second_partial(0, 1).unwrap(), 1.0);
        assert_eq!(p.second_partial(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn derivative_lowers_order() {
        let x = Jet::variable(1, 2, 0, 0.5);
        let s = x.sin();
        let ds = s.derivative(0).unwrap();
        assert_eq!(ds.order(), 1);
        assert!((ds.value() - 0.5f64.cos()).abs() < 1e-15);
        assert!((ds.partial(0).unwrap() + 0.5f64.sin()).abs() < 1e-15);
        let dds = ds.derivative(0).unwrap();
        assert!(matches!(
            dds.derivative(0),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn mixed_orders_truncate() {
        let a = Jet::variable(2, 2, 0, 1.0);
        let b = Jet::variable(2, 1, 1, 1.0);
        assert_eq!((&a + &b).order(), 1);
        assert_eq!((&a * &b).order(), 1);
    }

    #[test]
    fn atan2_second_partials_match_difference_quotients() {
        let (a0, b0) = (0.3, -0.7);
        let a = Jet::variable(2, 2, 0, a0);
        let b = Jet::variable(2, 2, 1, b0);
        let f = a.atan2(&b);
        let h = 1e-5;
        let g = |a: f64, b: f64| a.atan2(b);
        let fab = (g(a0 + h, b0 + h) - g(a0 + h, b0 - h) - g(a0 - h, b0 + h)
            + g(a0 - h, b0 - h))
            / (4.0 * h * h);
        assert!((f.second_partial(0, 1).unwrap() - fab).abs() < 1e-5);
        let faa = (g(a0 + h, b0) - 2.0 * g(a0, b0) + g(a0 - h, b0)) / (h * h);
        assert!((f.second_partial(0, 0).unwrap() - faa).abs() < 1e-4);
    }
}
