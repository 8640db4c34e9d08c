use nalgebra::DMatrix;

use super::{DiracTriple, TripleJets};
use crate::calculus::multiindex::combinations;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{rank, solve_jets};

/// A subspace of `T_pM + T*_pM` given by spanning pairs `(X, alpha)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSubspace {
    pub point: Vec<f64>,
    /// Base dimension.
    pub n: usize,
    /// Fiber dimension.
    pub m: usize,
    pub basis: Vec<(Vec<f64>, Vec<f64>)>,
}

impl PointSubspace {
    pub fn new(point: Vec<f64>, n: usize, m: usize, basis: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let dim = n + m;
        if point.len() != dim || basis.iter().any(|(x, a)| x.len() != dim || a.len() != dim) {
            return Err(Error::Dimension(format!("subspace vectors must have {dim} components")));
        }
        Ok(PointSubspace { point, n, m, basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + self.m
    }

    /// Basis as columns `(X; alpha)` of a `2N x k` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let dim = self.ambient_dim();
        DMatrix::from_fn(2 * dim, self.basis.len(), |row, col| {
            let (x, a) = &self.basis[col];
            if row < dim {
                x[row]
            } else {
                a[row - dim]
            }
        })
    }

    pub fn rank(&self) -> usize {
        rank(&self.matrix())
    }

    /// Largest `|<b_i, b_j>_+|` over basis pairs.
    pub fn isotropy_residual(&self) -> f64 {
        let dot = |a: &[f64], x: &[f64]| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        let mut worst = 0.0f64;
        for (xi, ai) in &self.basis {
            for (xj, aj) in &self.basis {
                worst = worst.max((0.5 * (dot(ai, xj) + dot(aj, xi))).abs());
            }
        }
        worst
    }
}

/// `L` at `point`, spanned by the generator sections of `triple`.
pub fn assemble(triple: &DiracTriple, point: &[f64]) -> Result<PointSubspace> {
    let jets = triple.jets(point, 0)?;
    let basis = triple
        .generators()
        .into_iter()
        .map(|g| {
            let s = jets.section(g);
            (s.x.values(), s.alpha.values())
        })
        .collect();
    PointSubspace::new(point.to_vec(), jets.n, jets.m, basis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonDegeneracy {
    pub ok: bool,
    pub intersection_dim: usize,
}

/// Dimension of `L` meet `V + V0`, where `V` is spanned by the `d/dy_a` and
/// `V0` by the `dx^i`.
pub fn fiber_nondegeneracy(l: &PointSubspace) -> NonDegeneracy {
    let dim = l.ambient_dim();
    let lm = l.matrix();
    let mut w = DMatrix::zeros(2 * dim, dim);
    for a in 0..l.m {
        w[(l.n + a, a)] = 1.0;
    }
    for i in 0..l.n {
        w[(dim + i, l.m + i)] = 1.0;
    }
    let joined = DMatrix::from_fn(2 * dim, lm.ncols() + dim, |r, c| {
        if c < lm.ncols() {
            lm[(r, c)]
        } else {
            w[(r, c - lm.ncols())]
        }
    });
    let intersection_dim = (rank(&lm) + dim).saturating_sub(rank(&joined));
    NonDegeneracy {
        ok: intersection_dim == 0,
        intersection_dim,
    }
}

/// Which graphs `L` is: of a 2-form when its projection to `TM` is onto, of
/// a bivector when its projection to `T*M` is onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphType {
    pub presymplectic: bool,
    pub poisson: bool,
}

pub fn classify_subspace(l: &PointSubspace) -> GraphType {
    let dim = l.ambient_dim();
    let m = l.matrix();
    GraphType {
        presymplectic: rank(&m.rows(0, dim).into_owned()) == dim,
        poisson: rank(&m.rows(dim, dim).into_owned()) == dim,
    }
}

/// Recovers `(Gamma, omega, pi)` jets from a jet basis `(X_r, alpha_r)` of a
/// fiber non-degenerate `L`, or `None` when it is degenerate.
///
/// The horizontal lift of `d/dx_k` is the element with `dx`-part of `X`
/// equal to `e_k` and `dy`-part of `alpha` zero; the element with vanishing
/// `dx`-part of `X` and `dy`-part of `alpha` equal to `e_a` is
/// `(pi#(eta_a), eta_a)`. Then `omega_ij = alpha_i(v_j)` and
/// `pi^ab = eta_b(X_a)`.
pub fn extract_triple_jets(
    n: usize,
    m: usize,
    basis: &[(Vec<Jet>, Vec<Jet>)],
    order: u8,
) -> Option<TripleJets> {
    let dim = n + m;
    if basis.len() != dim {
        return None;
    }
    let a: Vec<Vec<Jet>> = (0..dim)
        .map(|row| {
            basis
                .iter()
                .map(|(x, al)| if row < n { x[row].clone() } else { al[row].clone() })
                .collect()
        })
        .collect();
    let id: Vec<Vec<Jet>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| Jet::constant(dim, order, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let c = solve_jets(a, id)?;
    let combine = |k: usize, pick: &dyn Fn(&(Vec<Jet>, Vec<Jet>)) -> &Jet| {
        let mut acc = Jet::zero(dim, order);
        for (r, b) in basis.iter().enumerate() {
            acc.add_product(1.0, &c[r][k], pick(b));
        }
        acc
    };
    let mut gamma = Vec::with_capacity(n * m);
    for k in 0..n {
        for a in 0..m {
            gamma.push(combine(k, &|b| &b.0[n + a]));
        }
    }
    let omega = combinations(n, 2)
        .iter()
        .map(|ij| combine(ij[0], &|b| &b.1[ij[1]]))
        .collect();
    let pi = combinations(m, 2)
        .iter()
        .map(|ab| combine(n + ab[0], &|b| &b.0[n + ab[1]]))
        .collect();
    Some(TripleJets {
        n,
        m,
        order,
        gamma,
        omega,
        pi,
    })
}

/// Numeric extraction at one point.
pub fn extract_triple_at(l: &PointSubspace) -> Result<TripleJets> {
    let dim = l.ambient_dim();
    let nd = fiber_nondegeneracy(l);
    if !nd.ok || l.basis.len() != dim {
        return Err(Error::Degenerate {
            point: l.point.clone(),
            intersection_dim: nd.intersection_dim.max(1),
        });
    }
    let to_jets = |v: &[f64]| -> Vec<Jet> { v.iter().map(|&x| Jet::constant(dim, 0, x)).collect() };
    let basis: Vec<_> = l.basis.iter().map(|(x, a)| (to_jets(x), to_jets(a))).collect();
    extract_triple_jets(l.n, l.m, &basis, 0).ok_or_else(|| Error::Degenerate {
        point: l.point.clone(),
        intersection_dim: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::FibrationChart;

    #[test]
    fn zero_data_assembles_to_horizontal_plus_annihilator() {
        let c = FibrationChart::from_boxes(&[("x", -1.0, 1.0)], &[("y1", -1.0, 1.0), ("y2", -1.0, 1.0)])
            .unwrap();
        let t = DiracTriple::parse(&c, &[&["0", "0"]], &[], &["0"]).unwrap();
        let l = assemble(&t, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(l.basis[0], (vec![1.0, 0.0, 0.0], vec![0.0; 3]));
        assert_eq!(l.basis[1], (vec![0.0; 3], vec![0.0, 1.0, 0.0]));
        assert_eq!(l.basis[2], (vec![0.0; 3], vec![0.0, 0.0, 1.0]));
        assert!(fiber_nondegeneracy(&l).ok);
        assert_eq!(l.isotropy_residual(), 0.0);
    }

    #[test]
    fn graph_of_area_form_on_line_bundle_is_degenerate() {
        // graph of dx ^ dy over R(x) x R(y): (d/dx, dy), (d/dy, -dx)
        let l = PointSubspace::new(
            vec![0.0, 0.0],
            1,
            1,
            vec![(vec![1.0, 0.0], vec![0.0, 1.0]), (vec![0.0, 1.0], vec![-1.0, 0.0])],
        )
        .unwrap();
        assert!(!fiber_nondegeneracy(&l).ok);
        assert!(matches!(extract_triple_at(&l), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn extraction_inverts_assembly_pointwise() {
        let c = FibrationChart::from_boxes(
            &[("u", -1.0, 1.0), ("v", -1.0, 1.0)],
            &[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0)],
        )
        .unwrap();
        let t = DiracTriple::parse(
            &c,
            &[&["y", "u*z", "1"], &["x*v", "0", "-y"]],
            &["u + z^2"],
            &["z", "-y", "x + u"],
        )
        .unwrap();
        let p = [0.3, -0.2, 0.5, 0.1, -0.7];
        let l = assemble(&t, &p).unwrap();
        assert!(l.isotropy_residual() < 1e-15);
        let back = extract_triple_at(&l).unwrap();
        let want = t.jets(&p, 0).unwrap();
        for (a, b) in back
            .gamma
            .iter()
            .chain(&back.omega)
            .chain(&back.pi)
            .zip(want.gamma.iter().chain(&want.omega).chain(&want.pi))
        {
            assert!((a.value() - b.value()).abs() < 1e-14);
        }
        // rank pi is even, so TM-projection misses one fiber direction
        let g = classify_subspace(&l);
        assert!(g.poisson && !g.presymplectic);
    }
}
