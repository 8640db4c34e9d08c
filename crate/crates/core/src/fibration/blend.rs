use std::sync::Arc;

use super::{ConnectionCoeffs, FibrationChart};
use crate::calculus::{FieldSource, FnSource};
use crate::dirac::DiracTriple;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::sampling::sample_points;

/// Weight sums and shared bivectors are checked at this many seeded points.
const CHECK_SAMPLES: usize = 64;
const CHECK_TOL: f64 = 1e-12;

/// Base-only weights `rho_k` with `sum rho_k = 1`, written over the total
/// chart's variables.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    chart: FibrationChart,
    weights: Vec<Expr>,
}

impl PartitionOfUnity {
    pub fn new(chart: &FibrationChart, weights: Vec<Expr>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Dimension("partition of unity needs a weight".into()));
        }
        for w in &weights {
            chart.check_base_only(w)?;
        }
        for p in sample_points(chart.total(), CHECK_SAMPLES, 0) {
            let sum = weights
                .iter()
                .map(|w| w.eval(&p))
                .sum::<Result<f64>>()?;
            if (sum - 1.0).abs() > CHECK_TOL {
                return Err(Error::WeightSum { sum, point: p });
            }
        }
        Ok(PartitionOfUnity {
            chart: chart.clone(),
            weights,
        })
    }

    pub fn parse(chart: &FibrationChart, sources: &[&str]) -> Result<Self> {
        let weights = sources
            .iter()
            .map(|s| chart.total().parse(s))
            .collect::<Result<_>>()?;
        PartitionOfUnity::new(chart, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Expr] {
        &self.weights
    }

    pub fn eval(&self, point: &[f64], order: u8) -> Result<Vec<Jet>> {
        self.weights.iter().map(|w| w.eval_jet(point, order)).collect()
    }
}

fn blended(
    pou: &PartitionOfUnity,
    parts: Vec<Arc<dyn FieldSource>>,
    label: &'static str,
) -> Arc<dyn FieldSource> {
    let len = parts[0].len();
    let pou = pou.clone();
    let dim = pou.chart.dim();
    Arc::new(FnSource::new(len, label, move |p, order| {
        let rho = pou.eval(p, order)?;
        let mut acc = vec![Jet::zero(dim, order); len];
        for (r, part) in rho.iter().zip(&parts) {
            for (a, v) in acc.iter_mut().zip(part.eval(p, order)?) {
                a.add_product(1.0, r, &v);
            }
        }
        Ok(acc)
    }))
}

/// `(sum rho_k Gamma_k, sum rho_k omega_k, pi)` for members sharing `pi`.
pub fn blend_triples(pou: &PartitionOfUnity, members: &[DiracTriple]) -> Result<DiracTriple> {
    if members.len() != pou.len() {
        return Err(Error::Dimension(format!(
            "{} weights for {} members",
            pou.len(),
            members.len()
        )));
    }
    if members.iter().any(|t| *t.chart() != pou.chart) {
        return Err(Error::ChartMismatch);
    }
    let first = &members[0];
    for p in sample_points(pou.chart.total(), CHECK_SAMPLES, 1) {
        let want = first.pi().eval(&p, 0)?;
        for t in &members[1..] {
            let got = t.pi().eval(&p, 0)?;
            let close = want
                .iter()
                .zip(&got)
                .all(|(a, b)| (a.value() - b.value()).abs() <= CHECK_TOL * a.value().abs().max(1.0));
            if !close {
                return Err(Error::PiMismatch);
            }
        }
    }
    let gamma = blended(
        pou,
        members.iter().map(|t| t.gamma().source().clone()).collect(),
        "blend_gamma",
    );
    let omega = blended(pou, members.iter().map(|t| t.omega().clone()).collect(), "blend_omega");
    DiracTriple::new(
        ConnectionCoeffs::new(pou.chart.clone(), gamma)?,
        omega,
        first.pi().clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> FibrationChart {
        FibrationChart::from_boxes(&[("u", -1.0, 1.0)], &[("x", -1.0, 1.0), ("y", -1.0, 1.0)]).unwrap()
    }

    #[test]
    fn weights_must_sum_to_one_and_ignore_fibers() {
        let c = chart();
        assert!(PartitionOfUnity::parse(&c, &["u^2", "1 - u^2"]).is_ok());
        assert!(matches!(
            PartitionOfUnity::parse(&c, &["u^2", "1 - u"]),
            Err(Error::WeightSum { .. })
        ));
        assert!(matches!(
            PartitionOfUnity::parse(&c, &["x", "1 - x"]),
            Err(Error::FiberDependence(_))
        ));
    }

    #[test]
    fn blend_mixes_connections_and_keeps_pi() {
        let c = chart();
        let a = DiracTriple::parse(&c, &[&["1", "0"]], &[], &["1"]).unwrap();
        let b = DiracTriple::parse(&c, &[&["0", "y"]], &[], &["1"]).unwrap();
        let pou = PartitionOfUnity::parse(&c, &["u^2", "1 - u^2"]).unwrap();
        let t = blend_triples(&pou, &[a.clone(), b]).unwrap();
        let g = t.gamma().values(&[0.5, 0.0, 0.4]).unwrap();
        assert!((g[0][0] - 0.25).abs() < 1e-15 && (g[0][1] - 0.3).abs() < 1e-15);

        let other = DiracTriple::parse(&c, &[&["0", "0"]], &[], &["x"]).unwrap();
        assert_eq!(blend_triples(&pou, &[a, other]).unwrap_err(), Error::PiMismatch);
    }
}
