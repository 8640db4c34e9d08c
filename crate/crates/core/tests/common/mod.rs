#![allow(dead_code)]

use std::sync::Arc;

use fibdirac_core::calculus::{Chart, TensorField, Variance};
use fibdirac_core::expr::Expr;

pub fn cube(dim: usize) -> Arc<Chart> {
    let names = ["x", "y", "z", "w", "s", "t"];
    let coords: Vec<(&str, f64, f64)> = names[..dim].iter().map(|n| (*n, -1.0, 1.0)).collect();
    Chart::from_box(&coords).unwrap()
}

/// Quadratic polynomial in `dim` variables from `1 + dim + dim^2` coefficients.
pub fn quadratic(dim: usize, c: &[f64]) -> Expr {
    assert_eq!(c.len(), quadratic_len(dim));
    let mut terms = vec![Expr::num(c[0])];
    for i in 0..dim {
        terms.push(Expr::mul(Expr::num(c[1 + i]), Expr::var(i)));
        for j in 0..dim {
            let k = 1 + dim + i * dim + j;
            terms.push(Expr::mul(Expr::num(c[k]), Expr::mul(Expr::var(i), Expr::var(j))));
        }
    }
    Expr::sum(terms)
}

pub fn quadratic_len(dim: usize) -> usize {
    1 + dim + dim * dim
}

/// A field whose coefficients are quadratics built from consecutive chunks.
pub fn field(chart: &Arc<Chart>, variance: Variance, degree: usize, c: &[f64]) -> TensorField {
    let dim = chart.dim();
    let q = quadratic_len(dim);
    let exprs = c.chunks(q).map(|ch| quadratic(dim, ch)).collect();
    TensorField::from_exprs(chart, variance, degree, exprs).unwrap()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
