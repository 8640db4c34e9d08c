//! Tensor algebra on jets at a single point.
//!
//! A [`FieldJet`] holds the jets of the independent components of a form or
//! multivector at one point. Differential operators consume one derivative
//! order: inputs of order `r` give outputs of order `r - 1`.

use super::multiindex::{binomial, combinations, rank, sort_with_sign};
use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    /// Differential forms.
    Covariant,
    /// Multivector fields.
    Contravariant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldJet {
    variance: Variance,
    degree: usize,
    dim: usize,
    coeffs: Vec<Jet>,
}

impl FieldJet {
    pub fn new(variance: Variance, degree: usize, dim: usize, coeffs: Vec<Jet>) -> Result<Self> {
        if degree > dim {
            return Err(Error::Degree(format!("degree {degree} exceeds dimension {dim}")));
        }
        let expected = binomial(dim, degree);
        if coeffs.len() != expected {
            return Err(Error::Dimension(format!(
                "degree-{degree} field in dimension {dim} needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(FieldJet {
            variance,
            degree,
            dim,
            coeffs,
        })
    }

    pub fn zeros(variance: Variance, degree: usize, dim: usize, order: u8) -> Self {
        FieldJet {
            variance,
            degree,
            dim,
            coeffs: vec![Jet::zero(dim, order); binomial(dim, degree)],
        }
    }

    pub fn scalar(j: Jet) -> Self {
        FieldJet {
            variance: Variance::Covariant,
            degree: 0,
            dim: j.dim(),
            coeffs: vec![j],
        }
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Jet] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Jet> {
        self.coeffs
    }

    pub fn order(&self) -> u8 {
        self.coeffs.iter().map(Jet::order).min().unwrap_or(0)
    }

    /// Component at an arbitrary index tuple, with its antisymmetry sign.
    pub fn get(&self, idx: &[usize]) -> Option<(f64, &Jet)> {
        let (sign, sorted) = sort_with_sign(idx)?;
        Some((sign, &self.coeffs[rank(&sorted, self.dim)]))
    }

    /// Component at an increasing index tuple.
    pub fn at(&self, increasing: &[usize]) -> &Jet {
        &self.coeffs[rank(increasing, self.dim)]
    }

    pub fn at_mut(&mut self, increasing: &[usize]) -> &mut Jet {
        let r = rank(increasing, self.dim);
        &mut self.coeffs[r]
    }

    pub fn values(&self) -> Vec<f64> {
        self.coeffs.iter().map(Jet::value).collect()
    }

    /// Fully antisymmetric component array of length `dim^degree`, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let total = self.dim.pow(self.degree as u32);
        let mut out = vec![0.0; total];
        let mut idx = vec![0usize; self.degree];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut r = flat;
            for k in (0..self.degree).rev() {
                idx[k] = r % self.dim;
                r /= self.dim;
            }
            if let Some((s, j)) = self.get(&idx) {
                *slot = s * j.value();
            }
        }
        out
    }

    pub fn truncate(&self, order: u8) -> FieldJet {
        FieldJet {
            coeffs: self.coeffs.iter().map(|j| j.truncate(order)).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, c: f64) -> FieldJet {
        FieldJet {
            coeffs: self.coeffs.iter().map(|j| j.scale(c)).collect(),
            ..self.clone()
        }
    }

    fn same_shape(&self, other: &FieldJet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        if self.variance != other.variance || self.degree != other.degree {
            return Err(Error::Degree(format!(
                "{:?} degree {} vs {:?} degree {}",
                self.variance, self.degree, other.variance, other.degree
            )));
        }
        Ok(())
    }
}

fn expect(f: &FieldJet, variance: Variance, degree: Option<usize>, what: &str) -> Result<()> {
    if f.variance != variance || degree.is_some_and(|d| d != f.degree) {
        return Err(Error::Degree(format!(
            "{what}: got {:?} field of degree {}",
            f.variance, f.degree
        )));
    }
    Ok(())
}

fn same_dim(a: &FieldJet, b: &FieldJet) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::Dimension(format!("{} vs {}", a.dim, b.dim)));
    }
    Ok(())
}

fn lowered(order: u8) -> Result<u8> {
    order.checked_sub(1).ok_or(Error::OrderExceeded {
        requested: 1,
        available: 0,
    })
}

/// `partials[c][l]` is the jet of `d/dx_l` of coefficient `c`.
fn partials(f: &FieldJet) -> Result<Vec<Vec<Jet>>> {
    f.coeffs
        .iter()
        .map(|j| (0..f.dim).map(|l| j.derivative(l)).collect())
        .collect()
}

pub fn add(a: &FieldJet, b: &FieldJet) -> Result<FieldJet> {
    a.same_shape(b)?;
    Ok(FieldJet {
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        ..a.clone()
    })
}

pub fn sub(a: &FieldJet, b: &FieldJet) -> Result<FieldJet> {
    a.same_shape(b)?;
    Ok(FieldJet {
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        ..a.clone()
    })
}

/// Multiplies every component by the scalar function `f`.
pub fn scale_by(f: &Jet, t: &FieldJet) -> FieldJet {
    FieldJet {
        coeffs: t.coeffs.iter().map(|c| f * c).collect(),
        ..t.clone()
    }
}

pub fn exterior_derivative(w: &FieldJet) -> Result<FieldJet> {
    expect(w, Variance::Covariant, None, "exterior derivative needs a form")?;
    let k = w.degree;
    if k >= w.dim {
        return Err(Error::Degree(format!(
            "d of a degree-{k} form in dimension {}",
            w.dim
        )));
    }
    let order = lowered(w.order())?;
    let mut out = FieldJet::zeros(Variance::Covariant, k + 1, w.dim, order);
    let mut rest = Vec::with_capacity(k);
    for (slot, idx) in combinations(w.dim, k + 1).into_iter().enumerate() {
        for r in 0..=k {
            rest.clear();
            rest.extend(idx.iter().enumerate().filter(|(p, _)| *p != r).map(|(_, i)| *i));
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let d = w.at(&rest).derivative(idx[r])?;
            out.coeffs[slot].add_scaled(sign, &d);
        }
    }
    Ok(out)
}

/// `[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i`.
pub fn lie_bracket(x: &FieldJet, y: &FieldJet) -> Result<FieldJet> {
    expect(x, Variance::Contravariant, Some(1), "Lie bracket needs vector fields")?;
    expect(y, Variance::Contravariant, Some(1), "Lie bracket needs vector fields")?;
    same_dim(x, y)?;
    let n = x.dim;
    let dx = partials(x)?;
    let dy = partials(y)?;
    let order = lowered(x.order().min(y.order()))?;
    let mut out = FieldJet::zeros(Variance::Contravariant, 1, n, order);
    for i in 0..n {
        for j in 0..n {
            out.coeffs[i].add_product(1.0, &x.coeffs[j], &dy[i][j]);
            out.coeffs[i].add_product(-1.0, &y.coeffs[j], &dx[i][j]);
        }
    }
    Ok(out)
}

/// Lie derivative along the vector field `x` of a scalar, form or
/// multivector. On multivectors this is the Schouten bracket `[x, t]`.
pub fn lie_derivative(x: &FieldJet, t: &FieldJet) -> Result<FieldJet> {
    expect(x, Variance::Contravariant, Some(1), "Lie derivative needs a vector field")?;
    same_dim(x, t)?;
    let n = x.dim;
    let k = t.degree;
    let dx = partials(x)?;
    let dt = partials(t)?;
    let order = lowered(x.order().min(t.order()))?;
    let mut out = FieldJet::zeros(t.variance, k, n, order);
    let mut swapped = vec![0usize; k];
    for (slot, idx) in combinations(n, k).into_iter().enumerate() {
        let acc = &mut out.coeffs[slot];
        for l in 0..n {
            acc.add_product(1.0, &x.coeffs[l], &dt[slot][l]);
        }
        for r in 0..k {
            for l in 0..n {
                swapped.copy_from_slice(&idx);
                swapped[r] = l;
                let Some((sign, comp)) = t.get(&swapped) else {
                    continue;
                };
                match t.variance {
                    // + w_{..l..} d_{i_r} X^l
                    Variance::Covariant => acc.add_product(sign, comp, &dx[l][idx[r]]),
                    // - T^{..l..} d_l X^{i_r}
                    Variance::Contravariant => acc.add_product(-sign, comp, &dx[idx[r]][l]),
                }
            }
        }
    }
    Ok(out)
}

/// `[pi, pi]^{ijk} = sum over cyclic (i, j, k) of pi^{il} d_l pi^{jk}`, so
/// that `[pi, pi](df, dg, dh) = {f,{g,h}} + {g,{h,f}} + {h,{f,g}}` with
/// `{f, g} = pi(df, dg)`.
pub fn schouten_square(p: &FieldJet) -> Result<FieldJet> {
    expect(p, Variance::Contravariant, Some(2), "Schouten square needs a bivector")?;
    let n = p.dim;
    let order = lowered(p.order())?;
    if n < 3 {
        return Err(Error::Degree(format!("no trivectors in dimension {n}")));
    }
    let dp = partials(p)?;
    let mut out = FieldJet::zeros(Variance::Contravariant, 3, n, order);
    for (slot, idx) in combinations(n, 3).into_iter().enumerate() {
        let acc = &mut out.coeffs[slot];
        for c in 0..3 {
            let (i, j, k) = (idx[c], idx[(c + 1) % 3], idx[(c + 2) % 3]);
            let Some((sjk, _)) = p.get(&[j, k]) else {
                continue;
            };
            let jk = rank(&sorted2(j, k), n);
            for l in 0..n {
                if let Some((sil, pil)) = p.get(&[i, l]) {
                    acc.add_product(sil * sjk, pil, &dp[jk][l]);
                }
            }
        }
    }
    Ok(out)
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Interior product `i_X w` of a vector into the first slot of a form.
pub fn interior_product(x: &FieldJet, w: &FieldJet) -> Result<FieldJet> {
    expect(x, Variance::Contravariant, Some(1), "interior product needs a vector")?;
    expect(w, Variance::Covariant, None, "interior product needs a form")?;
    contract_first(x, w)
}

/// Contraction of a 1-form into the first slot of a multivector; for a
/// bivector this is the sharp map, `pi#(a) = pi(a, .)`.
pub fn contract(a: &FieldJet, t: &FieldJet) -> Result<FieldJet> {
    expect(a, Variance::Covariant, Some(1), "contraction needs a 1-form")?;
    expect(t, Variance::Contravariant, None, "contraction needs a multivector")?;
    contract_first(a, t)
}

pub fn sharp(p: &FieldJet, a: &FieldJet) -> Result<FieldJet> {
    expect(p, Variance::Contravariant, Some(2), "sharp needs a bivector")?;
    contract(a, p)
}

fn contract_first(v: &FieldJet, t: &FieldJet) -> Result<FieldJet> {
    same_dim(v, t)?;
    if t.degree == 0 {
        return Err(Error::Degree("cannot contract into a scalar".into()));
    }
    let n = t.dim;
    let order = v.order().min(t.order());
    let mut out = FieldJet::zeros(t.variance, t.degree - 1, n, order);
    let mut full = vec![0usize; t.degree];
    for (slot, rest) in combinations(n, t.degree - 1).into_iter().enumerate() {
        full[1..].copy_from_slice(&rest);
        for j in 0..n {
            full[0] = j;
            if let Some((s, c)) = t.get(&full) {
                out.coeffs[slot].add_product(s, &v.coeffs[j], c);
            }
        }
    }
    Ok(out)
}

/// Wedge product of two fields of the same variance.
pub fn wedge(a: &FieldJet, b: &FieldJet) -> Result<FieldJet> {
    same_dim(a, b)?;
    if a.variance != b.variance {
        return Err(Error::Degree("wedge of a form with a multivector".into()));
    }
    let (p, q, n) = (a.degree, b.degree, a.dim);
    if p + q > n {
        return Err(Error::Degree(format!("degree {} exceeds dimension {n}", p + q)));
    }
    let order = a.order().min(b.order());
    let mut out = FieldJet::zeros(a.variance, p + q, n, order);
    for (slot, idx) in combinations(n, p + q).into_iter().enumerate() {
        for pick in combinations(p + q, p) {
            let left: Vec<usize> = pick.iter().map(|&r| idx[r]).collect();
            let right: Vec<usize> = (0..p + q)
                .filter(|r| !pick.contains(r))
                .map(|r| idx[r])
                .collect();
            let mut order_tuple = pick.clone();
            order_tuple.extend((0..p + q).filter(|r| !pick.contains(r)));
            let (sign, _) = sort_with_sign(&order_tuple).expect("distinct positions");
            out.coeffs[slot].add_product(sign, a.at(&left), b.at(&right));
        }
    }
    Ok(out)
}

/// `w(X_1, ..., X_k)` for a k-form and k vectors.
pub fn evaluate_form(w: &FieldJet, vectors: &[&FieldJet]) -> Result<Jet> {
    expect(w, Variance::Covariant, Some(vectors.len()), "form evaluation")?;
    let mut cur = w.clone();
    for v in vectors {
        cur = interior_product(v, &cur)?;
    }
    Ok(cur.coeffs.pop_single())
}

/// `T(a_1, ..., a_k)` for a k-vector and k one-forms.
pub fn evaluate_multivector(t: &FieldJet, forms: &[&FieldJet]) -> Result<Jet> {
    expect(t, Variance::Contravariant, Some(forms.len()), "multivector evaluation")?;
    let mut cur = t.clone();
    for a in forms {
        cur = contract(a, &cur)?;
    }
    Ok(cur.coeffs.pop_single())
}

/// `a(X)` for a 1-form and a vector.
pub fn pair(a: &FieldJet, x: &FieldJet) -> Result<Jet> {
    evaluate_form(a, &[x])
}

/// Directional derivative `X(f)` of a scalar.
pub fn directional(x: &FieldJet, f: &Jet) -> Result<Jet> {
    let s = FieldJet::scalar(f.clone());
    Ok(lie_derivative(x, &s)?.coeffs.pop_single())
}

/// Gradient `df` of a scalar jet as a 1-form.
pub fn differential(f: &Jet) -> Result<FieldJet> {
    exterior_derivative(&FieldJet::scalar(f.clone()))
}

trait PopSingle {
    fn pop_single(self) -> Jet;
}

impl PopSingle for Vec<Jet> {
    fn pop_single(mut self) -> Jet {
        debug_assert_eq!(self.len(), 1);
        self.pop().expect("scalar field has one coefficient")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_field(variance: Variance, degree: usize, dim: usize, values: &[f64]) -> FieldJet {
        let coeffs = values.iter().map(|&v| Jet::constant(dim, 2, v)).collect();
        FieldJet::new(variance, degree, dim, coeffs).unwrap()
    }

    #[test]
    fn interior_of_area_form() {
        let dxdy = constant_field(Variance::Covariant, 2, 2, &[1.0]);
        let dx = constant_field(Variance::Contravariant, 1, 2, &[1.0, 0.0]);
        let r = interior_product(&dx, &dxdy).unwrap();
        assert_eq!(r.values(), vec![0.0, 1.0]);
    }

    #[test]
    fn sharp_convention() {
        // (dy ^ dz)# (dz) = -dy on R^3 with coordinates (x, y, z)
        let pi = constant_field(Variance::Contravariant, 2, 3, &[0.0, 0.0, 1.0]);
        let dz = constant_field(Variance::Covariant, 1, 3, &[0.0, 0.0, 1.0]);
        assert_eq!(sharp(&pi, &dz).unwrap().values(), vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn wedge_of_coordinate_forms() {
        let dx = constant_field(Variance::Covariant, 1, 3, &[1.0, 0.0, 0.0]);
        let dz = constant_field(Variance::Covariant, 1, 3, &[0.0, 0.0, 1.0]);
        let w = wedge(&dz, &dx).unwrap();
        // dz ^ dx = -dx ^ dz; components (xy, xz, yz)
        assert_eq!(w.values(), vec![0.0, -1.0, 0.0]);
        let dense = w.to_dense();
        assert_eq!(dense[2], -1.0); // (0, 2)
        assert_eq!(dense[6], 1.0); // (2, 0)
    }

    #[test]
    fn dense_round_trip_is_antisymmetric() {
        let t = constant_field(Variance::Contravariant, 3, 4, &[1.0, 2.0, 3.0, 4.0]);
        let d = t.to_dense();
        let at = |i: usize, j: usize, k: usize| d[(i * 4 + j) * 4 + k];
        assert_eq!(at(0, 1, 2), 1.0);
        assert_eq!(at(1, 0, 2), -1.0);
        assert_eq!(at(2, 0, 1), 1.0);
        assert_eq!(at(1, 2, 3), 4.0);
        assert_eq!(at(3, 3, 1), 0.0);
    }
}
