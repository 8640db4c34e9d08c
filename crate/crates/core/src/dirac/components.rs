//! The obstruction tensor on generator sections via the component formulas:
//!
//! * `T(eta_a, eta_b, eta_c) = [pi, pi](eta_a, eta_b, eta_c) / 2`
//! * `T(v_i, eta_b, eta_c) = (L_{v_i} pi)(eta_b, eta_c) / 2`
//! * `T(v_i, v_j, eta_c) = (eta_c(Omega(v_i, v_j)) + pi(d i_{v_i} i_{v_j} omega, eta_c)) / 2`
//! * `T(v_i, v_j, v_k) = d omega~(v_i, v_j, v_k) / 2`
//!
//! with `i_X i_Y omega = omega(Y, X)`. Other slot orders follow from total
//! antisymmetry.

use std::sync::Arc;

use super::{DiracTriple, Generator, TripleJets};
use crate::calculus::multiindex::{binomial, combinations};
use crate::calculus::pointwise::{self as pw, FieldJet, Variance};
use crate::calculus::{raised, FnSource, TensorField};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Per-point ingredients of the component formulas, at order 0.
#[derive(Clone, Debug)]
pub struct ComponentTables {
    n: usize,
    m: usize,
    pi: FieldJet,
    lifts: Vec<FieldJet>,
    etas: Vec<FieldJet>,
    schouten: Option<FieldJet>,
    lie_pi: Vec<FieldJet>,
    /// `[v_i, v_j]`, row-major.
    curvature: Vec<FieldJet>,
    /// `d omega_ij`, row-major.
    d_omega_ij: Vec<FieldJet>,
    d_omega: Option<FieldJet>,
}

impl ComponentTables {
    /// Needs jets of order at least 1.
    pub fn new(j: &TripleJets) -> Result<Self> {
        let (n, m) = (j.n, j.m);
        let dim = n + m;
        let pi1 = j.pi_total();
        let lifts1: Vec<FieldJet> = (0..n).map(|i| j.lift(i)).collect();
        let schouten = if dim >= 3 {
            Some(pw::schouten_square(&pi1)?)
        } else {
            None
        };
        let lie_pi = lifts1
            .iter()
            .map(|v| pw::lie_derivative(v, &pi1))
            .collect::<Result<_>>()?;
        let mut curvature = Vec::with_capacity(n * n);
        let mut d_omega_ij = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                curvature.push(pw::lie_bracket(&lifts1[i], &lifts1[k])?);
                d_omega_ij.push(pw::differential(&j.omega_at(i, k))?);
            }
        }
        let d_omega = if dim >= 3 {
            Some(pw::exterior_derivative(&j.omega_tilde())?)
        } else {
            None
        };
        Ok(ComponentTables {
            n,
            m,
            pi: pi1.truncate(0),
            lifts: lifts1.iter().map(|v| v.truncate(0)).collect(),
            etas: (0..m).map(|a| j.eta(a).truncate(0)).collect(),
            schouten,
            lie_pi,
            curvature,
            d_omega_ij,
            d_omega,
        })
    }

    fn check(&self, g: Generator) -> Result<()> {
        let ok = match g {
            Generator::Horizontal(i) => i < self.n,
            Generator::Vertical(a) => a < self.m,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnknownGenerator(g.to_string()))
        }
    }

    /// `T(g1, g2, g3)` from the component formulas.
    pub fn value(&self, gens: [Generator; 3]) -> Result<f64> {
        for g in gens {
            self.check(g)?;
        }
        // stable sort horizontal generators first, tracking the sign
        let mut g = gens;
        let mut sign = 1.0;
        for i in 1..3 {
            let mut k = i;
            while k > 0 && kind(g[k - 1]) > kind(g[k]) {
                g.swap(k - 1, k);
                sign = -sign;
                k -= 1;
            }
        }
        use Generator::{Horizontal as H, Vertical as V};
        let v = match g {
            [H(i), H(j), H(k)] => match &self.d_omega {
                Some(dw) => {
                    pw::evaluate_form(dw, &[&self.lifts[i], &self.lifts[j], &self.lifts[k]])?.value()
                }
                None => 0.0,
            },
            [H(i), H(j), V(c)] => {
                let eta = &self.etas[c];
                let curv = pw::pair(eta, &self.curvature[i * self.n + j])?.value();
                // i_{v_i} i_{v_j} omega = omega(v_j, v_i) = omega_ji
                let dg = &self.d_omega_ij[j * self.n + i];
                curv + pw::evaluate_multivector(&self.pi, &[dg, eta])?.value()
            }
            [H(i), V(b), V(c)] => {
                pw::evaluate_multivector(&self.lie_pi[i], &[&self.etas[b], &self.etas[c]])?.value()
            }
            [V(a), V(b), V(c)] => match &self.schouten {
                Some(s) => pw::evaluate_multivector(s, &[&self.etas[a], &self.etas[b], &self.etas[c]])?
                    .value(),
                None => 0.0,
            },
            _ => unreachable!("generators are sorted"),
        };
        Ok(0.5 * sign * v)
    }
}

impl ComponentTables {
    /// Unscaled residuals of the four integrability conditions: `[pi, pi]`,
    /// `L_v pi` on the `eta`s, `d omega~` on lifts, and the curvature
    /// identity `Omega(v_i, v_j) = pi#(d omega_ij)`.
    pub fn residuals(&self) -> Result<[f64; 4]> {
        let maxabs = |f: &FieldJet| f.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let (n, m) = (self.n, self.m);
        let schouten = self.schouten.as_ref().map_or(0.0, maxabs);
        let mut lie = 0.0f64;
        for l in &self.lie_pi {
            for b in 0..m {
                for c in b + 1..m {
                    let v = pw::evaluate_multivector(l, &[&self.etas[b], &self.etas[c]])?;
                    lie = lie.max(v.value().abs());
                }
            }
        }
        let mut closed = 0.0f64;
        if let Some(dw) = &self.d_omega {
            for c in combinations(n, 3) {
                let l = &self.lifts;
                let v = pw::evaluate_form(dw, &[&l[c[0]], &l[c[1]], &l[c[2]]])?;
                closed = closed.max(v.value().abs());
            }
        }
        let mut identity = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let rhs = pw::sharp(&self.pi, &self.d_omega_ij[i * n + j])?;
                let lhs = &self.curvature[i * n + j];
                for (a, b) in lhs.values().iter().zip(rhs.values()) {
                    identity = identity.max((a - b).abs());
                }
            }
        }
        Ok([schouten, lie, closed, identity])
    }
}

fn kind(g: Generator) -> u8 {
    match g {
        Generator::Horizontal(_) => 0,
        Generator::Vertical(_) => 1,
    }
}

pub fn t_components(triple: &DiracTriple, gens: [Generator; 3], point: &[f64]) -> Result<f64> {
    for g in gens {
        triple.check_generator(g)?;
    }
    ComponentTables::new(&triple.jets(point, 1)?)?.value(gens)
}

/// Component-formula values in the layout of
/// [`t_direct_table`](super::t_direct_table).
pub fn t_components_table(triple: &DiracTriple, point: &[f64]) -> Result<Vec<f64>> {
    let tables = ComponentTables::new(&triple.jets(point, 1)?)?;
    let gens = triple.generators();
    let mut out = Vec::with_capacity(gens.len().pow(3));
    for &a in &gens {
        for &b in &gens {
            for &c in &gens {
                out.push(tables.value([a, b, c])?);
            }
        }
    }
    Ok(out)
}

fn horizontal_three_form(
    triple: &DiracTriple,
    label: &'static str,
    f: fn(&TripleJets) -> Result<Vec<Jet>>,
) -> Result<TensorField> {
    let c = triple.chart();
    let (n, dim) = (c.base_dim(), c.dim());
    if dim < 3 {
        return Err(Error::Degree(format!("no 3-forms in dimension {dim}")));
    }
    let this = triple.clone();
    let source = FnSource::new(binomial(dim, 3), label, move |p, order| {
        let j = this.jets(p, raised(order)?)?;
        let values = f(&j)?;
        let mut out = FieldJet::zeros(Variance::Covariant, 3, dim, order);
        for (ijk, v) in combinations(n, 3).iter().zip(values) {
            *out.at_mut(ijk) = v.truncate(order);
        }
        Ok(out.into_coeffs())
    });
    TensorField::new(c.total().clone(), Variance::Covariant, 3, Arc::new(source))
}

/// `d_Gamma omega` as the restriction of `d omega~` to horizontal lifts,
/// written as a total 3-form in the `dx^i ^ dx^j ^ dx^k`.
pub fn d_gamma(triple: &DiracTriple) -> Result<TensorField> {
    horizontal_three_form(triple, "d_gamma", |j| {
        let dw = pw::exterior_derivative(&j.omega_tilde())?;
        let order = dw.order();
        let lifts: Vec<FieldJet> = (0..j.n).map(|i| j.lift(i).truncate(order)).collect();
        combinations(j.n, 3)
            .iter()
            .map(|c| pw::evaluate_form(&dw, &[&lifts[c[0]], &lifts[c[1]], &lifts[c[2]]]))
            .collect()
    })
}

/// `d_Gamma omega` from the Koszul formula over horizontal lifts, with the
/// brackets projected to the horizontal before pairing.
pub fn d_gamma_koszul(triple: &DiracTriple) -> Result<TensorField> {
    horizontal_three_form(triple, "d_gamma_koszul", |j| {
        let (n, m) = (j.n, j.m);
        let lifts: Vec<FieldJet> = (0..n).map(|i| j.lift(i)).collect();
        let w = j.omega_tilde();
        let order = j.order - 1;
        let w0 = w.truncate(order);
        let gamma0: Vec<Jet> = j.gamma.iter().map(|g| g.truncate(order)).collect();
        let horizontal = |x: &FieldJet| -> FieldJet {
            let mut c = x.coeffs().to_vec();
            for a in 0..m {
                let mut acc = Jet::zero(n + m, order);
                for i in 0..n {
                    acc.add_product(1.0, &c[i], &gamma0[i * m + a]);
                }
                c[n + a] = acc;
            }
            FieldJet::new(Variance::Contravariant, 1, n + m, c).expect("shape matches")
        };
        let lifts0: Vec<FieldJet> = lifts.iter().map(|v| v.truncate(order)).collect();
        let term = |a: usize, b: usize, c: usize| -> Result<Jet> {
            // v_a(omega(v_b, v_c)) - omega(h[v_a, v_b], v_c)
            let wbc = pw::evaluate_form(&w, &[&lifts[b], &lifts[c]])?;
            let along = pw::directional(&lifts[a], &wbc)?;
            let br = horizontal(&pw::lie_bracket(&lifts[a], &lifts[b])?);
            Ok(&along - &pw::evaluate_form(&w0, &[&br, &lifts0[c]])?)
        };
        combinations(n, 3)
            .iter()
            .map(|ijk| {
                let (i, k, l) = (ijk[0], ijk[1], ijk[2]);
                // cyclic sum of the two-term blocks reproduces the six-term formula
                Ok(&(&term(i, k, l)? + &term(k, l, i)?) + &term(l, i, k)?)
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::FibrationChart;

    #[test]
    fn linear_poisson_fiber_has_vanishing_schouten_component() {
        let c = FibrationChart::from_boxes(
            &[("u", -1.0, 1.0)],
            &[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0)],
        )
        .unwrap();
        let t = DiracTriple::parse(&c, &[&["0", "0", "0"]], &[], &["z", "-y", "x"]).unwrap();
        let gens = [Generator::Vertical(0), Generator::Vertical(1), Generator::Vertical(2)];
        assert!(t_components(&t, gens, &[0.1, 0.2, 0.3, 0.4]).unwrap().abs() < 1e-15);
        assert!(matches!(
            t_components(&t, [Generator::Horizontal(1), gens[0], gens[1]], &[0.1, 0.2, 0.3, 0.4]),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn d_gamma_formulas_agree() {
        let c = FibrationChart::from_boxes(
            &[("u1", -1.0, 1.0), ("u2", -1.0, 1.0), ("u3", -1.0, 1.0)],
            &[("y", -1.0, 1.0)],
        )
        .unwrap();
        let t = DiracTriple::parse(
            &c,
            &[&["y*u2"], &["u1*y^2"], &["sin(u3 + y)"]],
            &["u3*y", "u1 + y^2", "u2*u1*y"],
            &[],
        )
        .unwrap();
        let p = [0.2, -0.3, 0.5, 0.7];
        let a = d_gamma(&t).unwrap().values(&p).unwrap();
        let b = d_gamma_koszul(&t).unwrap().values(&p).unwrap();
        assert!(a[0].abs() > 1e-3);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13, "{x} vs {y}");
        }
    }
}
