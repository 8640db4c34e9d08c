//! Fiber non-degenerate almost Dirac structures and their integrability.
//!
//! A [`DiracTriple`] `(Gamma, omega, pi)` on a fibration chart determines the
//! subbundle `L = graph(pi) + graph(omega)` of `TM + T*M`, spanned by the
//! generator sections
//!
//! * `s_v_i = (v_i, omega_ij dx^j)` for each base coordinate, and
//! * `s_eta_a = (pi^ab d/dy_b, eta_a)` with `eta_a = dy_a - Gamma[i][a] dx^i`.
//!
//! Sign conventions: `pi#(a) = pi(a, .)`, `<(X,a),(Y,b)>_+ = (a(Y) + b(X))/2`
//! and `<(X,a),(Y,b)>_- = (a(Y) - b(X))/2`.

mod bracket;
mod components;
mod graph;
mod report;
mod subspace;

use std::fmt;
use std::sync::Arc;

pub use bracket::{
    courant_bracket, courant_bracket_jets, pairing_minus, pairing_plus, t_direct, t_direct_table,
    Section, SectionJet, MEMBERSHIP_TOL,
};
pub use components::{
    d_gamma, d_gamma_koszul, t_components, t_components_table, ComponentTables,
};
pub use graph::{graph_of_poisson, graph_of_presymplectic, GraphKind, GraphModel};
pub use report::{
    degeneracy_scan, graph_report, integrability_report, point_residuals, ConditionStats, DegeneracyStats, IntegrabilityReport,
    SamplePlan, Verdict, CONDITION_NAMES,
};
pub use subspace::{
    assemble, classify_subspace, extract_triple_at, extract_triple_jets, fiber_nondegeneracy,
    GraphType, NonDegeneracy, PointSubspace,
};

use crate::calculus::multiindex::{binomial, rank};
use crate::calculus::pointwise::{FieldJet, Variance};
use crate::calculus::{ExprSource, FieldSource, FnSource, TensorField};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fibration::{lift_jets, ConnectionCoeffs, FibrationChart};
use crate::jet::Jet;

#[derive(Clone, Debug)]
pub struct DiracTriple {
    gamma: ConnectionCoeffs,
    omega: Arc<dyn FieldSource>,
    pi: Arc<dyn FieldSource>,
}

impl DiracTriple {
    pub fn new(
        gamma: ConnectionCoeffs,
        omega: Arc<dyn FieldSource>,
        pi: Arc<dyn FieldSource>,
    ) -> Result<Self> {
        let c = gamma.chart();
        let (wn, pn) = (binomial(c.base_dim(), 2), binomial(c.fiber_dim(), 2));
        if omega.len() != wn || pi.len() != pn {
            return Err(Error::Dimension(format!(
                "triple needs {wn} omega and {pn} pi coefficients, got {} and {}",
                omega.len(),
                pi.len()
            )));
        }
        Ok(DiracTriple { gamma, omega, pi })
    }

    pub fn from_exprs(
        chart: &FibrationChart,
        gamma: Vec<Vec<Expr>>,
        omega: Vec<Expr>,
        pi: Vec<Expr>,
    ) -> Result<Self> {
        let gamma = ConnectionCoeffs::from_exprs(chart, gamma)?;
        for e in omega.iter().chain(&pi) {
            if e.max_var().is_some_and(|v| v >= chart.dim()) {
                return Err(Error::Dimension("variable outside the chart".into()));
            }
        }
        DiracTriple::new(gamma, Arc::new(ExprSource(omega)), Arc::new(ExprSource(pi)))
    }

    /// Parses `gamma` rows by base index, `omega_ij` for `i < j` and
    /// `pi^ab` for `a < b`, all over the total chart.
    pub fn parse(
        chart: &FibrationChart,
        gamma: &[&[&str]],
        omega: &[&str],
        pi: &[&str],
    ) -> Result<Self> {
        let p = |s: &&str| chart.total().parse(s);
        let g = ConnectionCoeffs::parse(chart, gamma)?;
        let omega = omega.iter().map(p).collect::<Result<_>>()?;
        let pi = pi.iter().map(p).collect::<Result<_>>()?;
        DiracTriple::new(g, Arc::new(ExprSource(omega)), Arc::new(ExprSource(pi)))
    }

    pub fn chart(&self) -> &FibrationChart {
        self.gamma.chart()
    }

    pub fn gamma(&self) -> &ConnectionCoeffs {
        &self.gamma
    }

    pub fn omega(&self) -> &Arc<dyn FieldSource> {
        &self.omega
    }

    pub fn pi(&self) -> &Arc<dyn FieldSource> {
        &self.pi
    }

    pub fn jets(&self, point: &[f64], order: u8) -> Result<TripleJets> {
        let c = self.chart();
        c.total().check_point(point)?;
        Ok(TripleJets {
            n: c.base_dim(),
            m: c.fiber_dim(),
            order,
            gamma: self.gamma.eval(point, order)?,
            omega: self.omega.eval(point, order)?,
            pi: self.pi.eval(point, order)?,
        })
    }

    /// Generator list: horizontal ones first, then vertical ones.
    pub fn generators(&self) -> Vec<Generator> {
        let c = self.chart();
        (0..c.base_dim())
            .map(Generator::Horizontal)
            .chain((0..c.fiber_dim()).map(Generator::Vertical))
            .collect()
    }

    pub fn check_generator(&self, g: Generator) -> Result<()> {
        let c = self.chart();
        let ok = match g {
            Generator::Horizontal(i) => i < c.base_dim(),
            Generator::Vertical(a) => a < c.fiber_dim(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnknownGenerator(g.to_string()))
        }
    }

    fn jet_field(&self, label: &'static str, f: fn(&TripleJets) -> FieldJet, variance: Variance, degree: usize) -> Result<TensorField> {
        let this = self.clone();
        let len = binomial(self.chart().dim(), degree);
        let source = FnSource::new(len, label, move |p, order| {
            Ok(f(&this.jets(p, order)?).into_coeffs())
        });
        TensorField::new(self.chart().total().clone(), variance, degree, Arc::new(source))
    }

    /// `omega` extended by zero on vertical vectors: `omega_ij dx^i ^ dx^j`.
    pub fn omega_tilde(&self) -> Result<TensorField> {
        self.jet_field("omega_tilde", TripleJets::omega_tilde, Variance::Covariant, 2)
    }

    /// `pi` as a bivector on the total chart.
    pub fn pi_field(&self) -> Result<TensorField> {
        self.jet_field("pi_total", TripleJets::pi_total, Variance::Contravariant, 2)
    }

    /// The generator section as a lazy pair of fields.
    pub fn generator_section(&self, g: Generator) -> Result<Section> {
        self.check_generator(g)?;
        let n = self.chart().dim();
        let mk = |form: bool| -> Result<TensorField> {
            let this = self.clone();
            let source = FnSource::new(n, "generator_section", move |p, order| {
                let s = this.jets(p, order)?.section(g);
                Ok(if form { s.alpha } else { s.x }.into_coeffs())
            });
            let variance = if form {
                Variance::Covariant
            } else {
                Variance::Contravariant
            };
            TensorField::new(self.chart().total().clone(), variance, 1, Arc::new(source))
        };
        Section::new(mk(false)?, mk(true)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    /// `s_v_i` for base coordinate `i`.
    Horizontal(usize),
    /// `s_eta_a` for fiber coordinate `a`.
    Vertical(usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Horizontal(i) => write!(f, "v{}", i + 1),
            Generator::Vertical(a) => write!(f, "eta{}", a + 1),
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_index = |rest: &str| -> Option<usize> {
            rest.parse::<usize>().ok().filter(|&k| k >= 1).map(|k| k - 1)
        };
        if let Some(k) = s.strip_prefix("eta").and_then(parse_index) {
            return Ok(Generator::Vertical(k));
        }
        if let Some(k) = s.strip_prefix('v').and_then(parse_index) {
            return Ok(Generator::Horizontal(k));
        }
        Err(Error::UnknownGenerator(s.to_string()))
    }
}

/// Coefficient jets of a triple at one point.
#[derive(Clone, Debug)]
pub struct TripleJets {
    pub n: usize,
    pub m: usize,
    pub order: u8,
    /// Row-major `[i * m + a]`.
    pub gamma: Vec<Jet>,
    /// `omega_ij` on increasing pairs of base indices.
    pub omega: Vec<Jet>,
    /// `pi^ab` on increasing pairs of fiber indices.
    pub pi: Vec<Jet>,
}

impl TripleJets {
    fn dim(&self) -> usize {
        self.n + self.m
    }

    fn constant(&self, v: f64) -> Jet {
        Jet::constant(self.dim(), self.order, v)
    }

    /// `omega_ij` for any pair, zero on the diagonal.
    pub fn omega_at(&self, i: usize, j: usize) -> Jet {
        signed(&self.omega, self.n, i, j).unwrap_or_else(|| self.constant(0.0))
    }

    pub fn pi_at(&self, a: usize, b: usize) -> Jet {
        signed(&self.pi, self.m, a, b).unwrap_or_else(|| self.constant(0.0))
    }

    pub fn omega_tilde(&self) -> FieldJet {
        let mut f = FieldJet::zeros(Variance::Covariant, 2, self.dim(), self.order);
        for i in 0..self.n {
            for j in i + 1..self.n {
                *f.at_mut(&[i, j]) = self.omega[rank(&[i, j], self.n)].clone();
            }
        }
        f
    }

    pub fn pi_total(&self) -> FieldJet {
        let n = self.n;
        let mut f = FieldJet::zeros(Variance::Contravariant, 2, self.dim(), self.order);
        for a in 0..self.m {
            for b in a + 1..self.m {
                *f.at_mut(&[n + a, n + b]) = self.pi[rank(&[a, b], self.m)].clone();
            }
        }
        f
    }

    /// Horizontal lift `v_i` of `d/dx_i`.
    pub fn lift(&self, i: usize) -> FieldJet {
        lift_jets(self.n, self.m, &self.gamma, i, self.order)
    }

    /// `eta_a = dy_a - Gamma[i][a] dx^i`.
    pub fn eta(&self, a: usize) -> FieldJet {
        let mut c: Vec<Jet> = (0..self.n).map(|i| -&self.gamma[i * self.m + a]).collect();
        c.extend((0..self.m).map(|b| self.constant(if a == b { 1.0 } else { 0.0 })));
        FieldJet::new(Variance::Covariant, 1, self.dim(), c).expect("shape matches")
    }

    pub fn section(&self, g: Generator) -> SectionJet {
        let dim = self.dim();
        match g {
            Generator::Horizontal(i) => {
                let mut a: Vec<Jet> = (0..self.n).map(|j| self.omega_at(i, j)).collect();
                a.extend((0..self.m).map(|_| self.constant(0.0)));
                SectionJet {
                    x: self.lift(i),
                    alpha: FieldJet::new(Variance::Covariant, 1, dim, a).expect("shape matches"),
                }
            }
            Generator::Vertical(a) => {
                let mut x: Vec<Jet> = (0..self.n).map(|_| self.constant(0.0)).collect();
                x.extend((0..self.m).map(|b| self.pi_at(a, b)));
                SectionJet {
                    x: FieldJet::new(Variance::Contravariant, 1, dim, x).expect("shape matches"),
                    alpha: self.eta(a),
                }
            }
        }
    }
}

fn signed(coeffs: &[Jet], dim: usize, i: usize, j: usize) -> Option<Jet> {
    use std::cmp::Ordering;
    match i.cmp(&j) {
        Ordering::Less => Some(coeffs[rank(&[i, j], dim)].clone()),
        Ordering::Greater => Some(-&coeffs[rank(&[j, i], dim)]),
        Ordering::Equal => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product() -> DiracTriple {
        let c = FibrationChart::from_boxes(
            &[("u", -1.0, 1.0), ("v", -1.0, 1.0)],
            &[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0)],
        )
        .unwrap();
        DiracTriple::parse(
            &c,
            &[&["0", "0", "0"], &["0", "0", "0"]],
            &["0"],
            &["z", "-y", "x"],
        )
        .unwrap()
    }

    #[test]
    fn generator_names_round_trip() {
        for g in [Generator::Horizontal(0), Generator::Vertical(2)] {
            assert_eq!(g.to_string().parse::<Generator>().unwrap(), g);
        }
        assert!("w1".parse::<Generator>().is_err());
        assert!("eta0".parse::<Generator>().is_err());
        let t = product();
        assert!(matches!(
            t.check_generator(Generator::Vertical(3)),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn vertical_section_uses_sharp_convention() {
        let t = product();
        let s = t.jets(&[0.0, 0.0, 0.3, 0.5, 0.7], 0).unwrap().section(Generator::Vertical(2));
        // pi#(dz) = y d/dx - x d/dy
        assert_eq!(s.x.values(), vec![0.0, 0.0, 0.5, -0.3, 0.0]);
        assert_eq!(s.alpha.values(), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }
}
