use std::sync::Arc;

use super::{
    assemble, extract_triple_jets, fiber_nondegeneracy, DiracTriple, NonDegeneracy, PointSubspace,
    TripleJets,
};
use crate::calculus::multiindex::binomial;
use crate::calculus::{FnSource, TensorField, Variance};
use crate::error::{Error, Result};
use crate::fibration::{ConnectionCoeffs, FibrationChart};
use crate::jet::Jet;
use crate::linalg::subspace_distance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// `graph(Pi) = {(Pi#(a), a)}` of a total bivector.
    Poisson,
    /// `graph(Omega) = {(X, i_X Omega)}` of a total 2-form.
    Presymplectic,
}

/// `L` given as the graph of a bivector or 2-form on the total chart.
#[derive(Clone, Debug)]
pub struct GraphModel {
    chart: FibrationChart,
    kind: GraphKind,
    field: TensorField,
}

fn graph(chart: &FibrationChart, field: &TensorField, kind: GraphKind) -> Result<GraphModel> {
    if **field.chart() != **chart.total() {
        return Err(Error::ChartMismatch);
    }
    let want = match kind {
        GraphKind::Poisson => Variance::Contravariant,
        GraphKind::Presymplectic => Variance::Covariant,
    };
    if field.variance() != want || field.degree() != 2 {
        return Err(Error::Degree(format!("{kind:?} graph needs a degree-2 field")));
    }
    Ok(GraphModel {
        chart: chart.clone(),
        kind,
        field: field.clone(),
    })
}

pub fn graph_of_poisson(chart: &FibrationChart, pi: &TensorField) -> Result<GraphModel> {
    graph(chart, pi, GraphKind::Poisson)
}

pub fn graph_of_presymplectic(chart: &FibrationChart, omega: &TensorField) -> Result<GraphModel> {
    graph(chart, omega, GraphKind::Presymplectic)
}

impl GraphModel {
    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn chart(&self) -> &FibrationChart {
        &self.chart
    }

    pub fn field(&self) -> &TensorField {
        &self.field
    }

    /// Jet basis of `L`: `(Pi#(dz_r), dz_r)` or `(d/dz_r, i_{d/dz_r} Omega)`.
    pub fn basis_jets(&self, point: &[f64], order: u8) -> Result<Vec<(Vec<Jet>, Vec<Jet>)>> {
        let f = self.field.eval(point, order)?;
        let dim = self.chart.dim();
        let unit = |r: usize| -> Vec<Jet> {
            (0..dim)
                .map(|j| Jet::constant(dim, order, if j == r { 1.0 } else { 0.0 }))
                .collect()
        };
        let row = |r: usize| -> Vec<Jet> {
            (0..dim)
                .map(|j| match f.get(&[r, j]) {
                    Some((s, c)) => c.scale(s),
                    None => Jet::zero(dim, order),
                })
                .collect()
        };
        Ok((0..dim)
            .map(|r| match self.kind {
                GraphKind::Poisson => (row(r), unit(r)),
                GraphKind::Presymplectic => (unit(r), row(r)),
            })
            .collect())
    }

    pub fn subspace(&self, point: &[f64]) -> Result<PointSubspace> {
        let basis = self
            .basis_jets(point, 0)?
            .into_iter()
            .map(|(x, a)| {
                (
                    x.iter().map(Jet::value).collect(),
                    a.iter().map(Jet::value).collect(),
                )
            })
            .collect();
        PointSubspace::new(
            point.to_vec(),
            self.chart.base_dim(),
            self.chart.fiber_dim(),
            basis,
        )
    }

    pub fn nondegeneracy(&self, point: &[f64]) -> Result<NonDegeneracy> {
        Ok(fiber_nondegeneracy(&self.subspace(point)?))
    }

    /// Triple jets by elimination over jets, so derivatives of the extracted
    /// data are exact up to rounding.
    pub fn triple_jets(&self, point: &[f64], order: u8) -> Result<TripleJets> {
        let (n, m) = (self.chart.base_dim(), self.chart.fiber_dim());
        let basis = self.basis_jets(point, order)?;
        extract_triple_jets(n, m, &basis, order).ok_or_else(|| Error::Degenerate {
            point: point.to_vec(),
            intersection_dim: self
                .nondegeneracy(point)
                .map(|d| d.intersection_dim.max(1))
                .unwrap_or(1),
        })
    }

    /// The triple whose coefficients are extracted from the graph on demand.
    /// Evaluation fails with a degeneracy error where `L` is degenerate.
    pub fn to_triple(&self) -> Result<DiracTriple> {
        let (n, m) = (self.chart.base_dim(), self.chart.fiber_dim());
        let part = |label: &'static str, len: usize, pick: fn(TripleJets) -> Vec<Jet>| {
            let this = self.clone();
            Arc::new(FnSource::new(len, label, move |p, order| {
                Ok(pick(this.triple_jets(p, order)?))
            }))
        };
        let gamma = ConnectionCoeffs::new(self.chart.clone(), part("graph_gamma", n * m, |t| t.gamma))?;
        DiracTriple::new(
            gamma,
            part("graph_omega", binomial(n, 2), |t| t.omega),
            part("graph_pi", binomial(m, 2), |t| t.pi),
        )
    }

    /// Sine of the largest principal angle between the graph and the
    /// subspace assembled from the extracted triple.
    pub fn decomposition_residual(&self, point: &[f64]) -> Result<f64> {
        let l = self.subspace(point)?;
        let rebuilt = assemble(&self.to_triple()?, point)?;
        Ok(subspace_distance(&l.matrix(), &rebuilt.matrix()))
    }
}
