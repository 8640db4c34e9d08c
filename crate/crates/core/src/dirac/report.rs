use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ComponentTables, DiracTriple, GraphModel, TripleJets};
use crate::error::Result;
use crate::sampling::sample_points;

/// Keys and descriptions of the four integrability conditions.
pub const CONDITION_NAMES: [(&str, &str); 4] = [
    ("i", "fiber bivector is Poisson: [pi, pi] = 0"),
    ("ii", "connection preserves pi: L_v pi = 0"),
    ("iii", "horizontal form is closed: d omega~(v, v, v) = 0"),
    ("iv", "curvature identity: Omega(v_i, v_j) = pi#(d omega_ij)"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionStats {
    pub name: String,
    pub max: f64,
    /// Mean over sample points of the per-point maximum.
    pub mean: f64,
    pub n: usize,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dirac,
    NotDirac,
    FiberDegenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyStats {
    pub degenerate_points: usize,
    pub samples: usize,
    pub max_intersection_dim: usize,
    /// First degenerate sample point.
    pub witness: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub seed: u64,
    pub tolerance: f64,
    pub samples: usize,
    pub conditions: BTreeMap<String, ConditionStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fiber_degeneracy: Option<DegeneracyStats>,
    pub verdict: Verdict,
}

impl IntegrabilityReport {
    /// Keys of the failing conditions, in order.
    pub fn failing(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Residuals of conditions (i) to (iv) at one point; needs order 1 jets.
pub fn point_residuals(jets: &TripleJets) -> Result<[f64; 4]> {
    ComponentTables::new(jets)?.residuals()
}

/// Samples the total chart and checks the four conditions at each point.
pub fn integrability_report(
    triple: &DiracTriple,
    plan: &SamplePlan,
    tolerance: f64,
) -> Result<IntegrabilityReport> {
    let points = sample_points(triple.chart().total(), plan.samples, plan.seed);
    let per_point: Vec<[f64; 4]> = points
        .par_iter()
        .map(|p| point_residuals(&triple.jets(p, 1)?))
        .collect::<Result<_>>()?;
    let mut conditions = BTreeMap::new();
    for (k, (key, name)) in CONDITION_NAMES.iter().enumerate() {
        let col = per_point.iter().map(|r| r[k]);
        // f64::max drops NaN, which must not read as a pass
        let max = if col.clone().any(f64::is_nan) {
            f64::NAN
        } else {
            col.clone().fold(0.0, f64::max)
        };
        let mean = if per_point.is_empty() {
            0.0
        } else {
            col.sum::<f64>() / per_point.len() as f64
        };
        conditions.insert(
            key.to_string(),
            ConditionStats {
                name: name.to_string(),
                max,
                mean,
                n: per_point.len(),
                pass: max < tolerance,
            },
        );
    }
    let verdict = if conditions.values().all(|c| c.pass) {
        Verdict::Dirac
    } else {
        Verdict::NotDirac
    };
    Ok(IntegrabilityReport {
        seed: plan.seed,
        tolerance,
        samples: plan.samples,
        conditions,
        fiber_degeneracy: None,
        verdict,
    })
}

/// Fiber non-degeneracy of a graph model at the sampled points.
pub fn degeneracy_scan(graph: &GraphModel, plan: &SamplePlan) -> Result<DegeneracyStats> {
    let points = sample_points(graph.chart().total(), plan.samples, plan.seed);
    let dims: Vec<usize> = points
        .par_iter()
        .map(|p| Ok(graph.nondegeneracy(p)?.intersection_dim))
        .collect::<Result<_>>()?;
    Ok(DegeneracyStats {
        degenerate_points: dims.iter().filter(|&&d| d > 0).count(),
        samples: points.len(),
        max_intersection_dim: dims.iter().copied().max().unwrap_or(0),
        witness: dims.iter().position(|&d| d > 0).map(|i| points[i].clone()),
    })
}

/// Report for a graph model: degenerate if any sample point is, otherwise
/// the report of the extracted triple.
pub fn graph_report(
    graph: &GraphModel,
    plan: &SamplePlan,
    tolerance: f64,
) -> Result<IntegrabilityReport> {
    let scan = degeneracy_scan(graph, plan)?;
    if scan.degenerate_points > 0 {
        return Ok(IntegrabilityReport {
            seed: plan.seed,
            tolerance,
            samples: plan.samples,
            conditions: BTreeMap::new(),
            fiber_degeneracy: Some(scan),
            verdict: Verdict::FiberDegenerate,
        });
    }
    integrability_report(&graph.to_triple()?, plan, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::FibrationChart;

    fn su2_over(gamma: &[&[&str]], omega: &[&str]) -> DiracTriple {
        let c = FibrationChart::from_boxes(
            &[("u", -1.0, 1.0), ("v", -1.0, 1.0)],
            &[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0)],
        )
        .unwrap();
        DiracTriple::parse(&c, gamma, omega, &["z", "-y", "x"]).unwrap()
    }

    #[test]
    fn product_passes() {
        let t = su2_over(&[&["0", "0", "0"], &["0", "0", "0"]], &["u*v"]);
        let r = integrability_report(&t, &SamplePlan { samples: 20, seed: 1 }, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Dirac);
        assert!(r.failing().is_empty());
    }

    #[test]
    fn nonconstant_omega_without_curvature_fails_identity_only() {
        let t = su2_over(&[&["0", "0", "0"], &["0", "0", "0"]], &["z"]);
        let r = integrability_report(&t, &SamplePlan { samples: 20, seed: 1 }, 1e-9).unwrap();
        assert_eq!(r.failing(), vec!["iv"]);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"not_dirac\""));
    }
}
