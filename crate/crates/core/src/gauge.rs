//! Coupling triples induced by a principal connection and a Hamiltonian
//! action of a finite-dimensional Lie algebra on a Poisson fiber.
//!
//! With connection coefficients `A[k][i]`, generators `V_k` and moments
//! `mu_k`, the coupling is `Gamma[i][a] = A[k][i] V_k^a`,
//! `omega_ij = mu_k F^k_ij` and the fiber bivector `pi`, where
//! `F^k_ij = d_i A^k_j - d_j A^k_i + c^k_lm A^l_i A^m_j`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::multiindex::combinations;
use crate::calculus::{Chart, FnSource, TensorField, Variance};
use crate::dirac::{DiracTriple, SamplePlan};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fibration::FibrationChart;
use crate::jet::Jet;
use crate::sampling::sample_points;

/// Residual bound for the action checks.
pub const ACTION_TOL: f64 = 1e-9;
/// `|det omega|` above this counts as non-degenerate.
pub const FATNESS_DET_TOL: f64 = 1e-12;
const ACTION_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraData {
    dim: usize,
    /// `c[(k * dim + i) * dim + j] = c^k_ij`.
    c: Vec<f64>,
}

impl LieAlgebraData {
    /// Structure constants indexed `[k][i][j]`.
    pub fn new(dim: usize, structure_constants: &[Vec<Vec<f64>>]) -> Result<Self> {
        let shape_ok = structure_constants.len() == dim
            && structure_constants
                .iter()
                .all(|m| m.len() == dim && m.iter().all(|r| r.len() == dim));
        if dim == 0 || !shape_ok {
            return Err(Error::LieAlgebra(format!(
                "structure constants must be a {dim} x {dim} x {dim} array"
            )));
        }
        let c: Vec<f64> = structure_constants.iter().flatten().flatten().copied().collect();
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::LieAlgebra("non-finite structure constant".into()));
        }
        let g = LieAlgebraData { dim, c };
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    if g.c(k, i, j) != -g.c(k, j, i) {
                        return Err(Error::LieAlgebra(format!(
                            "c^{k}_{i}{j} is not antisymmetric in the lower indices"
                        )));
                    }
                }
            }
        }
        let scale = g.c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let jacobi = g.jacobi_residual();
        // exact for integer constants; products of general floats round
        if jacobi > 64.0 * f64::EPSILON * scale * scale {
            return Err(Error::LieAlgebra(format!("Jacobi identity fails by {jacobi:e}")));
        }
        Ok(g)
    }

    pub fn abelian(dim: usize) -> Result<Self> {
        LieAlgebraData::new(dim, &vec![vec![vec![0.0; dim]; dim]; dim])
    }

    /// `so(3)` with `[e_x, e_y] = e_z` and cyclic.
    pub fn so3() -> Self {
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        for (k, i, j) in [(2, 0, 1), (0, 1, 2), (1, 2, 0)] {
            c[k][i][j] = 1.0;
            c[k][j][i] = -1.0;
        }
        LieAlgebraData::new(3, &c).expect("so(3) constants are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.dim + i) * self.dim + j]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
    }

    /// `max |c^m_ij c^n_mk + cyclic(i, j, k)|`.
    pub fn jacobi_residual(&self) -> f64 {
        let r = self.dim;
        let mut worst = 0.0f64;
        for n in 0..r {
            for i in 0..r {
                for j in 0..r {
                    for k in 0..r {
                        let s: f64 = (0..r)
                            .map(|m| {
                                self.c(m, i, j) * self.c(n, m, k)
                                    + self.c(m, j, k) * self.c(n, m, i)
                                    + self.c(m, k, i) * self.c(n, m, j)
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        let r = self.dim;
        (0..r)
            .map(|k| (0..r).map(|i| (0..r).map(|j| self.c(k, i, j)).collect()).collect())
            .collect()
    }
}

/// Local connection 1-form `A^k = A[k][i] dx^i` on the base chart.
#[derive(Clone, Debug)]
pub struct PrincipalConnectionChart {
    base: Arc<Chart>,
    a: Vec<Vec<Expr>>,
}

impl PrincipalConnectionChart {
    pub fn new(base: Arc<Chart>, a: Vec<Vec<Expr>>) -> Result<Self> {
        let n = base.dim();
        if a.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!("connection rows need {n} entries")));
        }
        if a.iter().flatten().any(|e| e.max_var().is_some_and(|v| v >= n)) {
            return Err(Error::Dimension("connection uses a non-base variable".into()));
        }
        Ok(PrincipalConnectionChart { base, a })
    }

    pub fn parse(base: Arc<Chart>, rows: &[&[&str]]) -> Result<Self> {
        let a = rows
            .iter()
            .map(|r| r.iter().map(|s| base.parse(s)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        PrincipalConnectionChart::new(base, a)
    }

    pub fn base(&self) -> &Arc<Chart> {
        &self.base
    }

    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.a
    }

    /// Hopf connection `(x dy - y dx) / (1 + x^2 + y^2)` on a 2D chart.
    pub fn hopf(base: Arc<Chart>) -> Result<Self> {
        if base.dim() != 2 {
            return Err(Error::Dimension("Hopf chart is two-dimensional".into()));
        }
        let [x, y] = [0, 1].map(|i| base.names()[i].clone());
        let den = format!("(1 + {x}^2 + {y}^2)");
        let row = [format!("-{y} / {den}"), format!("{x} / {den}")];
        PrincipalConnectionChart::parse(base, &[&[&row[0], &row[1]]])
    }

    fn check_algebra(&self, g: &LieAlgebraData) -> Result<()> {
        if self.a.len() != g.dim() {
            return Err(Error::Dimension(format!(
                "{} connection rows for a {}-dimensional algebra",
                self.a.len(),
                g.dim()
            )));
        }
        Ok(())
    }
}

/// A Poisson fiber `(F, pi)` with generators `V_k` and moments `mu_k`.
#[derive(Clone, Debug)]
pub struct HamiltonianAction {
    fiber: Arc<Chart>,
    pi: Vec<Expr>,
    generators: Vec<Vec<Expr>>,
    moments: Vec<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionResiduals {
    /// `max |pi#(d mu_k) - V_k|`.
    pub hamiltonian: f64,
    /// `max |L_{V_k} pi|`.
    pub invariance: f64,
    /// `max |V_k(mu_l) - c^m_kl mu_m|`.
    pub equivariance: f64,
}

impl HamiltonianAction {
    pub fn new(
        fiber: Arc<Chart>,
        pi: Vec<Expr>,
        generators: Vec<Vec<Expr>>,
        moments: Vec<Expr>,
    ) -> Result<Self> {
        let m = fiber.dim();
        if generators.len() != moments.len() || generators.iter().any(|v| v.len() != m) {
            return Err(Error::Dimension(format!(
                "need one moment and one {m}-component generator per algebra element"
            )));
        }
        // shape check of pi happens here
        TensorField::from_exprs(&fiber, Variance::Contravariant, 2, pi.clone())?;
        if generators
            .iter()
            .flatten()
            .chain(&moments)
            .any(|e| e.max_var().is_some_and(|v| v >= m))
        {
            return Err(Error::Dimension("action uses a non-fiber variable".into()));
        }
        Ok(HamiltonianAction {
            fiber,
            pi,
            generators,
            moments,
        })
    }

    pub fn parse(fiber: Arc<Chart>, pi: &[&str], generators: &[&[&str]], moments: &[&str]) -> Result<Self> {
        let p = |s: &&str| fiber.parse(s);
        let pi = pi.iter().map(p).collect::<Result<_>>()?;
        let generators = generators
            .iter()
            .map(|v| v.iter().map(p).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let moments = moments.iter().map(p).collect::<Result<_>>()?;
        HamiltonianAction::new(fiber, pi, generators, moments)
    }

    pub fn fiber(&self) -> &Arc<Chart> {
        &self.fiber
    }

    pub fn pi(&self) -> &[Expr] {
        &self.pi
    }

    pub fn generators(&self) -> &[Vec<Expr>] {
        &self.generators
    }

    pub fn moments(&self) -> &[Expr] {
        &self.moments
    }

    /// Largest residuals of the action conditions over seeded fiber samples.
    pub fn residuals(&self, g: &LieAlgebraData, plan: &SamplePlan) -> Result<ActionResiduals> {
        if self.moments.len() != g.dim() {
            return Err(Error::Dimension(format!(
                "{} moments for a {}-dimensional algebra",
                self.moments.len(),
                g.dim()
            )));
        }
        let f = &self.fiber;
        let pi = TensorField::from_exprs(f, Variance::Contravariant, 2, self.pi.clone())?;
        let mut checks = Vec::new();
        for (v, mu) in self.generators.iter().zip(&self.moments) {
            let v = TensorField::from_exprs(f, Variance::Contravariant, 1, v.clone())?;
            let mu = TensorField::scalar(f, mu.clone())?;
            checks.push((pi.sharp(&mu.d()?)?.sub(&v)?, v.lie_derivative(&pi)?, v));
        }
        let mus: Vec<TensorField> = self
            .moments
            .iter()
            .map(|e| TensorField::scalar(f, e.clone()))
            .collect::<Result<_>>()?;
        let dmus: Vec<TensorField> = mus.iter().map(|m| m.d()).collect::<Result<_>>()?;
        let maxabs = |v: Vec<f64>| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let points = sample_points(f, plan.samples, plan.seed);
        let per_point: Vec<ActionResiduals> = points
            .par_iter()
            .map(|p| {
                let mut out = ActionResiduals {
                    hamiltonian: 0.0,
                    invariance: 0.0,
                    equivariance: 0.0,
                };
                let mu_vals: Vec<f64> = mus.iter().map(|m| m.values(p).map(|v| v[0])).collect::<Result<_>>()?;
                for (k, (ham, inv, v)) in checks.iter().enumerate() {
                    out.hamiltonian = out.hamiltonian.max(maxabs(ham.values(p)?));
                    out.invariance = out.invariance.max(maxabs(inv.values(p)?));
                    let vk = v.values(p)?;
                    for (l, dmu) in dmus.iter().enumerate() {
                        let lhs: f64 = vk.iter().zip(dmu.values(p)?).map(|(a, b)| a * b).sum();
                        let rhs: f64 = (0..g.dim()).map(|m| g.c(m, k, l) * mu_vals[m]).sum();
                        out.equivariance = out.equivariance.max((lhs - rhs).abs());
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(per_point.iter().fold(
            ActionResiduals {
                hamiltonian: 0.0,
                invariance: 0.0,
                equivariance: 0.0,
            },
            |a, b| ActionResiduals {
                hamiltonian: a.hamiltonian.max(b.hamiltonian),
                invariance: a.invariance.max(b.invariance),
                equivariance: a.equivariance.max(b.equivariance),
            },
        ))
    }

    pub fn validate(&self, g: &LieAlgebraData) -> Result<ActionResiduals> {
        let r = self.residuals(
            g,
            &SamplePlan {
                samples: ACTION_SAMPLES,
                seed: 0,
            },
        )?;
        let fails = [
            ("pi#(d mu) = V", r.hamiltonian),
            ("L_V pi = 0", r.invariance),
            ("V_k(mu_l) = c^m_kl mu_m", r.equivariance),
        ];
        for (what, v) in fails {
            if !(v < ACTION_TOL) {
                return Err(Error::Hamiltonian(format!("{what} fails by {v:.3e}")));
            }
        }
        Ok(r)
    }
}

/// Curvature coefficients `F^k_ij` for `i < j` as expressions on the base,
/// indexed `[k][pair]`.
pub fn curvature_exprs(p: &PrincipalConnectionChart, g: &LieAlgebraData) -> Result<Vec<Vec<Expr>>> {
    p.check_algebra(g)?;
    let n = p.base.dim();
    let a = &p.a;
    Ok((0..g.dim())
        .map(|k| {
            combinations(n, 2)
                .iter()
                .map(|ij| {
                    let (i, j) = (ij[0], ij[1]);
                    let mut terms = vec![a[k][j].derivative(i), Expr::neg(a[k][i].derivative(j))];
                    for l in 0..g.dim() {
                        for m in 0..g.dim() {
                            let c = g.c(k, l, m);
                            if c != 0.0 {
                                terms.push(Expr::mul(
                                    Expr::num(c),
                                    Expr::mul(a[l][i].clone(), a[m][j].clone()),
                                ));
                            }
                        }
                    }
                    Expr::sum(terms)
                })
                .collect()
        })
        .collect())
}

/// `F^k_ij` at one base point from jets of `A`, indexed `[k][pair]`.
fn curvature_jets(p: &PrincipalConnectionChart, g: &LieAlgebraData, x: &[f64], order: u8) -> Result<Vec<Vec<Jet>>> {
    let n = p.base.dim();
    let up = crate::calculus::raised(order)?;
    let a: Vec<Vec<Jet>> = p
        .a
        .iter()
        .map(|row| row.iter().map(|e| e.eval_jet(x, up)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(g.dim());
    for k in 0..g.dim() {
        let mut row = Vec::new();
        for ij in combinations(n, 2) {
            let (i, j) = (ij[0], ij[1]);
            let mut f = (&a[k][j].derivative(i)? - &a[k][i].derivative(j)?).truncate(order);
            for l in 0..g.dim() {
                for m in 0..g.dim() {
                    f.add_product(g.c(k, l, m), &a[l][i], &a[m][j]);
                }
            }
            row.push(f.truncate(order));
        }
        out.push(row);
    }
    Ok(out)
}

/// The curvature as one base 2-form per algebra index, evaluated by
/// forward-mode differentiation of `A`.
#[allow(non_snake_case)]
pub fn curvature_F(p: &PrincipalConnectionChart, g: &LieAlgebraData) -> Result<Vec<TensorField>> {
    p.check_algebra(g)?;
    let n = p.base.dim();
    (0..g.dim())
        .map(|k| {
            let (p2, g2) = (p.clone(), g.clone());
            let src = FnSource::new(combinations(n, 2).len(), "gauge_curvature", move |x, order| {
                Ok(curvature_jets(&p2, &g2, x, order)?.swap_remove(k))
            });
            TensorField::new(p.base.clone(), Variance::Covariant, 2, Arc::new(src))
        })
        .collect()
}

/// `max_k |(dF + [A, F])^k_ijl|` over `i < j < l` at a base point.
pub fn bianchi_residual(p: &PrincipalConnectionChart, g: &LieAlgebraData, x: &[f64]) -> Result<f64> {
    p.check_algebra(g)?;
    let n = p.base.dim();
    let f = curvature_jets(p, g, x, 1)?;
    let a: Vec<Vec<f64>> = p
        .a
        .iter()
        .map(|row| row.iter().map(|e| e.eval(x)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let pair = |i: usize, j: usize| -> (f64, usize) {
        let (s, lo, hi) = if i < j { (1.0, i, j) } else { (-1.0, j, i) };
        (s, crate::calculus::multiindex::rank(&[lo, hi], n))
    };
    let mut worst = 0.0f64;
    for t in combinations(n, 3) {
        for k in 0..g.dim() {
            let mut s = 0.0;
            for (i, j, l) in [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])] {
                let (sg, r) = pair(j, l);
                s += sg * f[k][r].partial(i)?;
                for lo in 0..g.dim() {
                    for m in 0..g.dim() {
                        s += g.c(k, lo, m) * a[lo][i] * sg * f[m][r].value();
                    }
                }
            }
            worst = worst.max(s.abs());
        }
    }
    Ok(worst)
}

/// The coupling triple on `base x fiber`. Fails unless the action passes
/// [`HamiltonianAction::validate`].
pub fn build_coupling(
    p: &PrincipalConnectionChart,
    g: &LieAlgebraData,
    h: &HamiltonianAction,
) -> Result<DiracTriple> {
    p.check_algebra(g)?;
    h.validate(g)?;
    let chart = FibrationChart::new(p.base.clone(), h.fiber.clone())?;
    let (n, m) = (chart.base_dim(), chart.fiber_dim());
    let lift = |e: &Expr| e.shift_vars(n);
    let gamma = (0..n)
        .map(|i| {
            (0..m)
                .map(|a| {
                    Expr::sum((0..g.dim()).map(|k| {
                        Expr::mul(p.a[k][i].clone(), lift(&h.generators[k][a]))
                    }))
                })
                .collect()
        })
        .collect();
    let f = curvature_exprs(p, g)?;
    let omega = (0..combinations(n, 2).len())
        .map(|r| Expr::sum((0..g.dim()).map(|k| Expr::mul(lift(&h.moments[k]), f[k][r].clone()))))
        .collect();
    let pi = h.pi.iter().map(lift).collect();
    DiracTriple::from_exprs(&chart, gamma, omega, pi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fatness {
    Poisson,
    DiracOnly,
}

/// Poisson where `omega` is non-degenerate on horizontal vectors.
pub fn fatness_classify(triple: &DiracTriple, point: &[f64]) -> Result<Fatness> {
    let j = triple.jets(point, 0)?;
    let n = j.n;
    let w = nalgebra::DMatrix::from_fn(n, n, |i, k| j.omega_at(i, k).value());
    Ok(if n > 0 && w.determinant().abs() > FATNESS_DET_TOL {
        Fatness::Poisson
    } else {
        Fatness::DiracOnly
    })
}

/// `max |omega_ij - mu_k F^k_ij|` over seeded samples, with `F` recomputed by
/// forward-mode differentiation.
pub fn moment_relation_check(
    triple: &DiracTriple,
    p: &PrincipalConnectionChart,
    g: &LieAlgebraData,
    h: &HamiltonianAction,
    plan: &SamplePlan,
) -> Result<f64> {
    p.check_algebra(g)?;
    let chart = triple.chart();
    let n = chart.base_dim();
    let points = sample_points(chart.total(), plan.samples, plan.seed);
    let per_point: Vec<f64> = points
        .par_iter()
        .map(|pt| {
            let (x, y) = chart.split(pt);
            let f = curvature_jets(p, g, x, 0)?;
            let mu: Vec<f64> = h.moments.iter().map(|e| e.eval(y)).collect::<Result<_>>()?;
            let omega = triple.omega().eval(pt, 0)?;
            let mut worst = 0.0f64;
            for r in 0..combinations(n, 2).len() {
                let want: f64 = (0..g.dim()).map(|k| mu[k] * f[k][r].value()).sum();
                worst = worst.max((omega[r].value() - want).abs());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// Wraps a triple's coefficients as expressions when it has them.
pub fn triple_exprs(triple: &DiracTriple) -> Option<(Vec<Vec<Expr>>, Vec<Expr>, Vec<Expr>)> {
    let gamma = triple.gamma().exprs()?;
    let omega = triple.omega().exprs()?.to_vec();
    let pi = triple.pi().exprs()?.to_vec();
    Some((gamma, omega, pi))
}
