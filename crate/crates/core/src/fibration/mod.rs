//! Locally trivial fibrations in a product chart.
//!
//! Total coordinates list the base coordinates `x_1..x_n` first and the fiber
//! coordinates `y_1..y_m` after them. A connection is given by coefficients
//! `Gamma[i][a]`, with horizontal lifts `v_i = d/dx_i + Gamma[i][a] d/dy_a`.

mod blend;
mod transport;

use std::sync::Arc;

pub use blend::{blend_triples, PartitionOfUnity};
pub use transport::{
    convergence_ratio, holonomy_poisson_residual, parallel_transport, transport_point,
    HolonomyProbe, LoopPath, ResidualStats, TransportSample, DEFAULT_STEP,
};

use crate::calculus::pointwise::{self as pw, FieldJet, Variance};
use crate::calculus::{Chart, ExprSource, FieldSource, FnSource, TensorField};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;

#[derive(Clone, Debug, PartialEq)]
pub struct FibrationChart {
    base: Arc<Chart>,
    fiber: Arc<Chart>,
    total: Arc<Chart>,
}

impl FibrationChart {
    pub fn new(base: Arc<Chart>, fiber: Arc<Chart>) -> Result<Self> {
        let mut names = base.names().to_vec();
        names.extend_from_slice(fiber.names());
        let mut domain = base.domain().to_vec();
        domain.extend_from_slice(fiber.domain());
        // Chart::new rejects names shared between base and fiber
        let total = Chart::new(names, domain)?;
        Ok(FibrationChart { base, fiber, total })
    }

    pub fn from_boxes(base: &[(&str, f64, f64)], fiber: &[(&str, f64, f64)]) -> Result<Self> {
        FibrationChart::new(Chart::from_box(base)?, Chart::from_box(fiber)?)
    }

    pub fn base(&self) -> &Arc<Chart> {
        &self.base
    }

    pub fn fiber(&self) -> &Arc<Chart> {
        &self.fiber
    }

    pub fn total(&self) -> &Arc<Chart> {
        &self.total
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    pub fn dim(&self) -> usize {
        self.total.dim()
    }

    /// Splits a total-chart point into base and fiber parts.
    pub fn split<'a>(&self, point: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        point.split_at(self.base_dim())
    }

    pub fn join(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        p.extend_from_slice(y);
        p
    }

    /// Rejects expressions that depend on a fiber coordinate.
    pub fn check_base_only(&self, e: &Expr) -> Result<()> {
        for a in 0..self.fiber_dim() {
            if e.depends_on(self.base_dim() + a) {
                return Err(Error::FiberDependence(self.fiber.names()[a].clone()));
            }
        }
        Ok(())
    }
}

/// Connection coefficients `Gamma[i][a]` over the total chart, stored
/// row-major by base index.
#[derive(Clone, Debug)]
pub struct ConnectionCoeffs {
    chart: FibrationChart,
    source: Arc<dyn FieldSource>,
}

impl ConnectionCoeffs {
    pub fn new(chart: FibrationChart, source: Arc<dyn FieldSource>) -> Result<Self> {
        let want = chart.base_dim() * chart.fiber_dim();
        if source.len() != want {
            return Err(Error::Dimension(format!(
                "connection needs {want} coefficients, got {}",
                source.len()
            )));
        }
        Ok(ConnectionCoeffs { chart, source })
    }

    pub fn from_exprs(chart: &FibrationChart, rows: Vec<Vec<Expr>>) -> Result<Self> {
        let (n, m) = (chart.base_dim(), chart.fiber_dim());
        if rows.len() != n || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension(format!("connection must be {n} x {m}")));
        }
        let flat: Vec<Expr> = rows.into_iter().flatten().collect();
        if let Some(v) = flat.iter().filter_map(Expr::max_var).max() {
            if v >= chart.dim() {
                return Err(Error::Dimension(format!("variable {v} outside the chart")));
            }
        }
        ConnectionCoeffs::new(chart.clone(), Arc::new(ExprSource(flat)))
    }

    pub fn parse(chart: &FibrationChart, rows: &[&[&str]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| chart.total().parse(s)).collect())
            .collect::<Result<_>>()?;
        ConnectionCoeffs::from_exprs(chart, rows)
    }

    pub fn flat(chart: &FibrationChart) -> Self {
        let rows = vec![vec![Expr::Num(0.0); chart.fiber_dim()]; chart.base_dim()];
        ConnectionCoeffs::from_exprs(chart, rows).expect("shape matches")
    }

    pub fn chart(&self) -> &FibrationChart {
        &self.chart
    }

    pub fn source(&self) -> &Arc<dyn FieldSource> {
        &self.source
    }

    pub fn exprs(&self) -> Option<Vec<Vec<Expr>>> {
        let m = self.chart.fiber_dim();
        let flat = self.source.exprs()?;
        Some(flat.chunks(m.max(1)).map(<[Expr]>::to_vec).collect())
    }

    /// Coefficient jets, row-major `[i * m + a]`.
    pub fn eval(&self, point: &[f64], order: u8) -> Result<Vec<Jet>> {
        self.chart.total().check_point(point)?;
        self.source.eval(point, order)
    }

    pub fn values(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        let m = self.chart.fiber_dim();
        let flat = self.eval(point, 0)?;
        Ok((0..self.chart.base_dim())
            .map(|i| flat[i * m..(i + 1) * m].iter().map(Jet::value).collect())
            .collect())
    }

    /// The lift `v_i` of the coordinate field `d/dx_i`.
    pub fn lift_coordinate(&self, i: usize) -> Result<TensorField> {
        if i >= self.chart.base_dim() {
            return Err(Error::Dimension(format!("base coordinate {i}")));
        }
        let this = self.clone();
        let n = self.chart.dim();
        let source = FnSource::new(n, "lift_coordinate", move |p, order| {
            let g = this.source.eval(p, order)?;
            Ok(lift_jets(this.chart.base_dim(), this.chart.fiber_dim(), &g, i, order).into_coeffs())
        });
        TensorField::new(
            self.chart.total().clone(),
            Variance::Contravariant,
            1,
            Arc::new(source),
        )
    }

    /// Horizontal lift of a base vector field.
    pub fn horizontal_lift(&self, v: &BaseVectorField) -> Result<TensorField> {
        if v.chart != self.chart {
            return Err(Error::ChartMismatch);
        }
        self.horizontal_projection(&v.as_total_field()?)
    }

    /// `w^i v_i`: the horizontal part of a total-chart vector field.
    pub fn horizontal_projection(&self, w: &TensorField) -> Result<TensorField> {
        if **w.chart() != **self.chart.total() {
            return Err(Error::ChartMismatch);
        }
        if w.variance() != Variance::Contravariant || w.degree() != 1 {
            return Err(Error::Degree("horizontal projection needs a vector field".into()));
        }
        let this = self.clone();
        let w = w.clone();
        let source = FnSource::new(self.chart.dim(), "horizontal_projection", move |p, order| {
            let g = this.source.eval(p, order)?;
            let wj = w.eval(p, order)?;
            let (n, m) = (this.chart.base_dim(), this.chart.fiber_dim());
            let mut out = wj.into_coeffs();
            for a in 0..m {
                let mut acc = Jet::zero(n + m, order);
                for i in 0..n {
                    acc.add_product(1.0, &out[i], &g[i * m + a]);
                }
                out[n + a] = acc;
            }
            Ok(out)
        });
        TensorField::new(
            self.chart.total().clone(),
            Variance::Contravariant,
            1,
            Arc::new(source),
        )
    }

    /// `Omega(v1, v2) = [lift v1, lift v2] - lift [v1, v2]`.
    pub fn curvature(&self, v1: &BaseVectorField, v2: &BaseVectorField) -> Result<TensorField> {
        let l1 = self.horizontal_lift(v1)?;
        let l2 = self.horizontal_lift(v2)?;
        let base_bracket = v1.as_total_field()?.lie_bracket(&v2.as_total_field()?)?;
        l1.lie_bracket(&l2)?
            .sub(&self.horizontal_projection(&base_bracket)?)
    }

    /// `Omega(d/dx_i, d/dx_j)^a = v_i(Gamma[j][a]) - v_j(Gamma[i][a])`,
    /// returned as a total-chart vector field with vanishing base part.
    pub fn coordinate_curvature(&self, i: usize, j: usize) -> Result<TensorField> {
        let n = self.chart.base_dim();
        if i >= n || j >= n {
            return Err(Error::Dimension(format!("base coordinates ({i}, {j})")));
        }
        let this = self.clone();
        let source = FnSource::new(self.chart.dim(), "coordinate_curvature", move |p, order| {
            let g = this.source.eval(p, crate::calculus::raised(order)?)?;
            Ok(coordinate_curvature_jets(&this.chart, &g, i, j)?
                .truncate(order)
                .into_coeffs())
        });
        TensorField::new(
            self.chart.total().clone(),
            Variance::Contravariant,
            1,
            Arc::new(source),
        )
    }
}

/// Jet of the lift `v_i` given the connection jets at a point.
pub(crate) fn lift_jets(n: usize, m: usize, gamma: &[Jet], i: usize, order: u8) -> FieldJet {
    let dim = n + m;
    let mut c: Vec<Jet> = (0..n)
        .map(|k| Jet::constant(dim, order, if k == i { 1.0 } else { 0.0 }))
        .collect();
    c.extend((0..m).map(|a| gamma[i * m + a].clone()));
    FieldJet::new(Variance::Contravariant, 1, dim, c).expect("shape matches")
}

/// `[v_i, v_j]` from connection jets; one order lower than the input.
pub(crate) fn coordinate_curvature_jets(
    chart: &FibrationChart,
    gamma: &[Jet],
    i: usize,
    j: usize,
) -> Result<FieldJet> {
    let order = gamma.iter().map(Jet::order).min().unwrap_or(0);
    let (n, m) = (chart.base_dim(), chart.fiber_dim());
    pw::lie_bracket(
        &lift_jets(n, m, gamma, i, order),
        &lift_jets(n, m, gamma, j, order),
    )
}

/// A vector field on the base, written over the total chart.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseVectorField {
    chart: FibrationChart,
    components: Vec<Expr>,
}

impl BaseVectorField {
    pub fn from_exprs(chart: &FibrationChart, components: Vec<Expr>) -> Result<Self> {
        if components.len() != chart.base_dim() {
            return Err(Error::Dimension(format!(
                "base field needs {} components, got {}",
                chart.base_dim(),
                components.len()
            )));
        }
        for e in &components {
            chart.check_base_only(e)?;
        }
        Ok(BaseVectorField {
            chart: chart.clone(),
            components,
        })
    }

    /// Parses components against the total chart so that fiber names are
    /// reported as fiber dependence rather than unknown identifiers.
    pub fn parse(chart: &FibrationChart, sources: &[&str]) -> Result<Self> {
        let comps = sources
            .iter()
            .map(|s| chart.total().parse(s))
            .collect::<Result<_>>()?;
        BaseVectorField::from_exprs(chart, comps)
    }

    pub fn coordinate(chart: &FibrationChart, i: usize) -> Result<Self> {
        let comps = (0..chart.base_dim())
            .map(|k| Expr::Num(if k == i { 1.0 } else { 0.0 }))
            .collect();
        BaseVectorField::from_exprs(chart, comps)
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// The field `v^i d/dx_i` on the total chart.
    pub fn as_total_field(&self) -> Result<TensorField> {
        let mut c = self.components.clone();
        c.extend(std::iter::repeat_n(Expr::Num(0.0), self.chart.fiber_dim()));
        TensorField::from_exprs(self.chart.total(), Variance::Contravariant, 1, c)
    }

    /// `dp` applied to a total-chart vector: its base components.
    pub fn project(chart: &FibrationChart, w: &[f64]) -> Vec<f64> {
        w[..chart.base_dim()].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_line() -> FibrationChart {
        FibrationChart::from_boxes(&[("x1", -1.0, 1.0), ("x2", -1.0, 1.0)], &[("y1", -1.0, 1.0)])
            .unwrap()
    }

    #[test]
    fn shared_names_are_rejected() {
        assert!(FibrationChart::from_boxes(&[("x", 0.0, 1.0)], &[("x", 0.0, 1.0)]).is_err());
    }

    #[test]
    fn lift_of_coordinate_field() {
        let c = plane_line();
        let g = ConnectionCoeffs::parse(&c, &[&["y1"], &["0"]]).unwrap();
        let v = g.lift_coordinate(0).unwrap().values(&[0.1, 0.2, 0.7]).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.7]);
        let flat = ConnectionCoeffs::flat(&c);
        assert_eq!(
            flat.lift_coordinate(0).unwrap().values(&[0.1, 0.2, 0.7]).unwrap(),
            vec![1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn base_fields_reject_fiber_dependence() {
        let c = plane_line();
        assert!(matches!(
            BaseVectorField::parse(&c, &["y1", "0"]),
            Err(Error::FiberDependence(n)) if n == "y1"
        ));
    }

    #[test]
    fn curvature_matches_coordinate_formula() {
        let c = plane_line();
        let g = ConnectionCoeffs::parse(&c, &[&["x2*y1"], &["0"]]).unwrap();
        let d1 = BaseVectorField::coordinate(&c, 0).unwrap();
        let d2 = BaseVectorField::coordinate(&c, 1).unwrap();
        let p = [0.3, -0.4, 0.6];
        let general = g.curvature(&d1, &d2).unwrap().values(&p).unwrap();
        let coords = g.coordinate_curvature(0, 1).unwrap().values(&p).unwrap();
        // v1(Gamma_2) - v2(Gamma_1) = 0 - d/dx2 (x2 y1) = -y1
        assert!((general[2] + 0.6).abs() < 1e-15);
        assert_eq!(general, coords);
        assert_eq!(&general[..2], &[0.0, 0.0]);
    }

    #[test]
    fn curvature_of_non_coordinate_fields_is_vertical() {
        let c = plane_line();
        let g = ConnectionCoeffs::parse(&c, &[&["x2*y1^2"], &["sin(x1)*y1"]]).unwrap();
        let v1 = BaseVectorField::parse(&c, &["x2", "1"]).unwrap();
        let v2 = BaseVectorField::parse(&c, &["x1^2", "-x1"]).unwrap();
        let w = g.curvature(&v1, &v2).unwrap().values(&[0.2, 0.5, -0.3]).unwrap();
        assert!(w[0].abs() < 1e-15 && w[1].abs() < 1e-15);
        assert!(w[2].abs() > 1e-3);
    }
}
