//! Forms and multivector fields on a single coordinate chart.
//!
//! Fields are lazy: a [`TensorField`] holds a [`FieldSource`] that produces
//! coefficient jets on demand, and every operator returns a new field that
//! evaluates its inputs one derivative order higher. Coefficients are stored
//! on strictly increasing multi-indices only.

pub mod multiindex;
mod ops;
pub mod pointwise;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::jet::{Jet, MAX_ORDER};
use multiindex::binomial;
pub use pointwise::{FieldJet, Variance};

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidChart(format!("degenerate interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    names: Vec<String>,
    domain: Vec<Interval>,
}

impl Chart {
    pub fn new(names: Vec<String>, domain: Vec<Interval>) -> Result<Arc<Chart>> {
        if names.len() != domain.len() {
            return Err(Error::InvalidChart(format!(
                "{} coordinates but {} intervals",
                names.len(),
                domain.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            let valid = n
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::InvalidChart(format!("invalid coordinate name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{n}`")));
            }
        }
        for iv in &domain {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(Arc::new(Chart { names, domain }))
    }

    /// Chart from `(name, lo, hi)` triples.
    pub fn from_box(coords: &[(&str, f64, f64)]) -> Result<Arc<Chart>> {
        let names = coords.iter().map(|c| c.0.to_string()).collect();
        let domain = coords
            .iter()
            .map(|c| Interval::new(c.1, c.2))
            .collect::<Result<_>>()?;
        Chart::new(names, domain)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && self.domain.iter().zip(point).all(|(iv, &x)| iv.contains(x))
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(Interval::mid).collect()
    }

    pub fn parse(&self, source: &str) -> Result<Expr> {
        parse(source, &self.names)
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Producer of coefficient jets for a field.
pub trait FieldSource: Send + Sync + fmt::Debug {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn eval(&self, point: &[f64], order: u8) -> Result<Vec<Jet>>;

    /// Closed-form coefficients, when available.
    fn exprs(&self) -> Option<&[Expr]> {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExprSource(pub Vec<Expr>);

impl FieldSource for ExprSource {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn eval(&self, point: &[f64], order: u8) -> Result<Vec<Jet>> {
        self.0.iter().map(|e| e.eval_jet(point, order)).collect()
    }

    fn exprs(&self) -> Option<&[Expr]> {
        Some(&self.0)
    }
}

type JetFn = dyn Fn(&[f64], u8) -> Result<Vec<Jet>> + Send + Sync;

/// Coefficients computed by a closure.
pub struct FnSource {
    len: usize,
    label: &'static str,
    f: Box<JetFn>,
}

impl FnSource {
    pub fn new(
        len: usize,
        label: &'static str,
        f: impl Fn(&[f64], u8) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        FnSource {
            len,
            label,
            f: Box::new(f),
        }
    }
}

impl fmt::Debug for FnSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnSource({}, len {})", self.label, self.len)
    }
}

impl FieldSource for FnSource {
    fn len(&self) -> usize {
        self.len
    }

    fn eval(&self, point: &[f64], order: u8) -> Result<Vec<Jet>> {
        (self.f)(point, order)
    }
}

/// Order needed from inputs so that a first-order operator can deliver
/// `order`.
pub(crate) fn raised(order: u8) -> Result<u8> {
    if order >= MAX_ORDER {
        return Err(Error::OrderExceeded {
            requested: order + 1,
            available: MAX_ORDER,
        });
    }
    Ok(order + 1)
}

#[derive(Clone, Debug)]
pub struct TensorField {
    chart: Arc<Chart>,
    variance: Variance,
    degree: usize,
    source: Arc<dyn FieldSource>,
}

impl TensorField {
    pub fn new(
        chart: Arc<Chart>,
        variance: Variance,
        degree: usize,
        source: Arc<dyn FieldSource>,
    ) -> Result<Self> {
        let n = chart.dim();
        if degree > n {
            return Err(Error::Degree(format!("degree {degree} exceeds dimension {n}")));
        }
        if source.len() != binomial(n, degree) {
            return Err(Error::Dimension(format!(
                "degree-{degree} field on a {n}-dimensional chart needs {} coefficients, got {}",
                binomial(n, degree),
                source.len()
            )));
        }
        Ok(TensorField {
            chart,
            variance,
            degree,
            source,
        })
    }

    pub fn from_exprs(
        chart: &Arc<Chart>,
        variance: Variance,
        degree: usize,
        exprs: Vec<Expr>,
    ) -> Result<Self> {
        if let Some(v) = exprs.iter().filter_map(Expr::max_var).max() {
            if v >= chart.dim() {
                return Err(Error::Dimension(format!(
                    "expression uses variable {v} on a {}-dimensional chart",
                    chart.dim()
                )));
            }
        }
        TensorField::new(chart.clone(), variance, degree, Arc::new(ExprSource(exprs)))
    }

    /// Parses one coefficient per increasing multi-index.
    pub fn parse(
        chart: &Arc<Chart>,
        variance: Variance,
        degree: usize,
        sources: &[&str],
    ) -> Result<Self> {
        let exprs = sources.iter().map(|s| chart.parse(s)).collect::<Result<_>>()?;
        TensorField::from_exprs(chart, variance, degree, exprs)
    }

    pub fn scalar(chart: &Arc<Chart>, e: Expr) -> Result<Self> {
        TensorField::from_exprs(chart, Variance::Covariant, 0, vec![e])
    }

    pub fn vector(chart: &Arc<Chart>, sources: &[&str]) -> Result<Self> {
        TensorField::parse(chart, Variance::Contravariant, 1, sources)
    }

    pub fn one_form(chart: &Arc<Chart>, sources: &[&str]) -> Result<Self> {
        TensorField::parse(chart, Variance::Covariant, 1, sources)
    }

    pub fn zero(chart: &Arc<Chart>, variance: Variance, degree: usize) -> Result<Self> {
        let len = binomial(chart.dim(), degree);
        TensorField::from_exprs(chart, variance, degree, vec![Expr::Num(0.0); len])
    }

    /// The coordinate vector field `d/dx_i`.
    pub fn coordinate_vector(chart: &Arc<Chart>, i: usize) -> Result<Self> {
        TensorField::from_exprs(chart, Variance::Contravariant, 1, unit(chart.dim(), i)?)
    }

    /// The coordinate differential `dx_i`.
    pub fn coordinate_form(chart: &Arc<Chart>, i: usize) -> Result<Self> {
        TensorField::from_exprs(chart, Variance::Covariant, 1, unit(chart.dim(), i)?)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn source(&self) -> &Arc<dyn FieldSource> {
        &self.source
    }

    pub fn exprs(&self) -> Option<&[Expr]> {
        self.source.exprs()
    }

    pub fn eval(&self, point: &[f64], order: u8) -> Result<FieldJet> {
        self.chart.check_point(point)?;
        if order > MAX_ORDER {
            return Err(Error::OrderExceeded {
                requested: order,
                available: MAX_ORDER,
            });
        }
        let coeffs = self.source.eval(point, order)?;
        FieldJet::new(self.variance, self.degree, self.dim(), coeffs)
    }

    /// Fully antisymmetric component array at `point`.
    pub fn eval_dense(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(point, 0)?.to_dense())
    }

    /// Coefficient values on increasing multi-indices at `point`.
    pub fn values(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(point, 0)?.values())
    }

    pub(crate) fn same_chart(&self, other: &TensorField) -> Result<()> {
        if Arc::ptr_eq(&self.chart, &other.chart) || *self.chart == *other.chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch)
        }
    }
}

fn unit(dim: usize, i: usize) -> Result<Vec<Expr>> {
    if i >= dim {
        return Err(Error::Dimension(format!("coordinate {i} on a {dim}-dimensional chart")));
    }
    Ok((0..dim)
        .map(|k| Expr::Num(if k == i { 1.0 } else { 0.0 }))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Arc<Chart> {
        Chart::from_box(&[("x", -1.0, 1.0), ("y", -1.0, 1.0)]).unwrap()
    }

    #[test]
    fn chart_invariants() {
        assert!(Chart::from_box(&[("x", 0.0, 1.0), ("x", 0.0, 1.0)]).is_err());
        assert!(Chart::from_box(&[("x", 1.0, 1.0)]).is_err());
        assert!(Chart::from_box(&[("2x", 0.0, 1.0)]).is_err());
        let c = xy();
        assert_eq!(c.dim(), 2);
        assert!(c.contains(&[0.5, -1.0]));
        assert!(!c.contains(&[1.5, 0.0]));
    }

    #[test]
    fn coefficient_count_is_checked() {
        let c = xy();
        assert!(matches!(
            TensorField::parse(&c, Variance::Covariant, 2, &["x", "y"]),
            Err(Error::Dimension(_))
        ));
        assert!(TensorField::parse(&c, Variance::Covariant, 3, &[]).is_err());
        let top = TensorField::parse(&c, Variance::Covariant, 2, &["x*y"]).unwrap();
        assert_eq!(top.eval_dense(&[0.5, 0.5]).unwrap(), vec![0.0, 0.25, -0.25, 0.0]);
    }

    #[test]
    fn order_above_maximum_is_rejected() {
        let f = TensorField::scalar(&xy(), Expr::var(0)).unwrap();
        assert!(matches!(
            f.eval(&[0.0, 0.0], 3),
            Err(Error::OrderExceeded { .. })
        ));
    }
}
