//! Seeded sample points and random test fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::Chart;
use crate::expr::{Expr, Func};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points drawn uniformly from the chart's domain box.
pub fn sample_points(chart: &Chart, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n).map(|_| sample_point(chart, &mut r)).collect()
}

pub fn sample_point(chart: &Chart, r: &mut impl Rng) -> Vec<f64> {
    chart
        .domain()
        .iter()
        .map(|iv| iv.lo + iv.width() * r.random::<f64>())
        .collect()
}

/// Random polynomial in `dim` variables of total degree at most `degree`,
/// with `terms` monomials and coefficients in `[-1, 1]`.
pub fn random_polynomial(r: &mut impl Rng, dim: usize, degree: u32, terms: usize) -> Expr {
    let monomials = (0..terms).map(|_| {
        let c = r.random_range(-1.0..=1.0);
        let mut m = Expr::num(c);
        let mut budget = r.random_range(0..=degree);
        while budget > 0 && dim > 0 {
            let v = r.random_range(0..dim);
            let p = r.random_range(1..=budget);
            m = Expr::mul(m, Expr::pow(Expr::var(v), p as i32));
            budget -= p;
        }
        m
    });
    Expr::sum(monomials)
}

/// Random expression of bounded depth that is defined on all of `R^dim`:
/// `log`, `sqrt`, `tan`, divisions and `atan2` only see arguments kept away
/// from their singularities.
pub fn random_expr(r: &mut impl Rng, dim: usize, depth: u32) -> Expr {
    if depth == 0 || r.random_bool(0.2) {
        return if dim > 0 && r.random_bool(0.7) {
            Expr::var(r.random_range(0..dim))
        } else {
            Expr::num(r.random_range(-2.0..=2.0))
        };
    }
    let mut sub = || random_expr(r, dim, depth - 1);
    let (a, b) = (sub(), sub());
    let square_plus = |c: f64, e: Expr| Expr::add(Expr::num(c), Expr::pow(e, 2));
    match r.random_range(0..11) {
        0 => Expr::add(a, b),
        1 => Expr::sub(a, b),
        2 | 3 => Expr::mul(a, b),
        4 => Expr::div(a, square_plus(1.0, b)),
        5 => Expr::call(Func::Sin, vec![a]),
        6 => Expr::call(Func::Cos, vec![a]),
        7 => Expr::call(Func::Exp, vec![Expr::call(Func::Sin, vec![a])]),
        8 => Expr::call(Func::Log, vec![square_plus(0.5, a)]),
        9 => Expr::call(Func::Sqrt, vec![square_plus(1.0, a)]),
        _ => Expr::call(Func::Atan2, vec![a, square_plus(0.5, b)]),
    }
}
