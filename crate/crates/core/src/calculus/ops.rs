use std::sync::Arc;

use super::pointwise::{self as pw, FieldJet};
use super::{raised, FnSource, TensorField};
use crate::error::Result;
use crate::jet::MAX_ORDER;

type PointOp = dyn Fn(&[FieldJet]) -> Result<FieldJet> + Send + Sync;

/// Builds a lazy field applying `op` pointwise to `inputs`. Differential
/// operators evaluate their inputs one order higher. Shapes are validated
/// up front by running `op` on zero jets.
fn lazy(
    label: &'static str,
    inputs: &[&TensorField],
    differential: bool,
    op: impl Fn(&[FieldJet]) -> Result<FieldJet> + Send + Sync + 'static,
) -> Result<TensorField> {
    let first = inputs[0];
    for other in &inputs[1..] {
        first.same_chart(other)?;
    }
    let n = first.dim();
    let probe: Vec<FieldJet> = inputs
        .iter()
        .map(|t| FieldJet::zeros(t.variance(), t.degree(), n, MAX_ORDER))
        .collect();
    let shape = op(&probe)?;
    let op: Arc<PointOp> = Arc::new(op);
    let owned: Vec<TensorField> = inputs.iter().map(|t| (*t).clone()).collect();
    let len = shape.coeffs().len();
    let source = FnSource::new(len, label, move |point, order| {
        let inner = if differential { raised(order)? } else { order };
        let jets = owned
            .iter()
            .map(|t| t.eval(point, inner))
            .collect::<Result<Vec<_>>>()?;
        let out = op(&jets)?;
        Ok(out.truncate(order).into_coeffs())
    });
    TensorField::new(
        first.chart().clone(),
        shape.variance(),
        shape.degree(),
        Arc::new(source),
    )
}

impl TensorField {
    /// Exterior derivative of a form.
    pub fn d(&self) -> Result<TensorField> {
        lazy("d", &[self], true, |j| pw::exterior_derivative(&j[0]))
    }

    /// Lie bracket `[self, y]` of vector fields.
    pub fn lie_bracket(&self, y: &TensorField) -> Result<TensorField> {
        lazy("lie_bracket", &[self, y], true, |j| pw::lie_bracket(&j[0], &j[1]))
    }

    /// Lie derivative of `t` along the vector field `self`.
    pub fn lie_derivative(&self, t: &TensorField) -> Result<TensorField> {
        lazy("lie_derivative", &[self, t], true, |j| {
            pw::lie_derivative(&j[0], &j[1])
        })
    }

    /// `[pi, pi]` of a bivector field.
    pub fn schouten_square(&self) -> Result<TensorField> {
        lazy("schouten_square", &[self], true, |j| pw::schouten_square(&j[0]))
    }

    /// Interior product `i_self w` of this vector field into a form.
    pub fn interior(&self, w: &TensorField) -> Result<TensorField> {
        lazy("interior", &[self, w], false, |j| pw::interior_product(&j[0], &j[1]))
    }

    /// Contraction of this 1-form into the first slot of a multivector.
    pub fn contract_into(&self, t: &TensorField) -> Result<TensorField> {
        lazy("contract", &[self, t], false, |j| pw::contract(&j[0], &j[1]))
    }

    /// `self#(a) = self(a, .)` for a bivector field.
    pub fn sharp(&self, a: &TensorField) -> Result<TensorField> {
        lazy("sharp", &[self, a], false, |j| pw::sharp(&j[0], &j[1]))
    }

    pub fn wedge(&self, other: &TensorField) -> Result<TensorField> {
        lazy("wedge", &[self, other], false, |j| pw::wedge(&j[0], &j[1]))
    }

    pub fn add(&self, other: &TensorField) -> Result<TensorField> {
        lazy("add", &[self, other], false, |j| pw::add(&j[0], &j[1]))
    }

    pub fn sub(&self, other: &TensorField) -> Result<TensorField> {
        lazy("sub", &[self, other], false, |j| pw::sub(&j[0], &j[1]))
    }

    pub fn scale(&self, c: f64) -> Result<TensorField> {
        lazy("scale", &[self], false, move |j| Ok(j[0].scale(c)))
    }

    /// Pointwise product with the scalar field `f`.
    pub fn times(&self, f: &TensorField) -> Result<TensorField> {
        lazy("times", &[f, self], false, |j| {
            if j[0].degree() != 0 {
                return Err(crate::error::Error::Degree(
                    "multiplier must be a scalar field".into(),
                ));
            }
            Ok(pw::scale_by(&j[0].coeffs()[0], &j[1]))
        })
    }

    /// The scalar `self(x_1, ..., x_k)` for a k-form and k vector fields.
    pub fn evaluate_form(&self, vectors: &[&TensorField]) -> Result<TensorField> {
        let mut all = vec![self];
        all.extend_from_slice(vectors);
        lazy("evaluate_form", &all, false, |j| {
            let args: Vec<&FieldJet> = j[1..].iter().collect();
            Ok(FieldJet::scalar(pw::evaluate_form(&j[0], &args)?))
        })
    }

    /// The scalar `self(a_1, ..., a_k)` for a k-vector and k one-forms.
    pub fn evaluate_multivector(&self, forms: &[&TensorField]) -> Result<TensorField> {
        let mut all = vec![self];
        all.extend_from_slice(forms);
        lazy("evaluate_multivector", &all, false, |j| {
            let args: Vec<&FieldJet> = j[1..].iter().collect();
            Ok(FieldJet::scalar(pw::evaluate_multivector(&j[0], &args)?))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Chart, Variance};
    use super::*;
    use crate::error::Error;

    fn xy() -> Arc<Chart> {
        Chart::from_box(&[("x", -1.0, 1.0), ("y", -1.0, 1.0)]).unwrap()
    }

    fn xyz() -> Arc<Chart> {
        Chart::from_box(&[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0)]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn d_of_x_dy() {
        let c = xy();
        let w = TensorField::one_form(&c, &["0", "x"]).unwrap();
        assert_eq!(w.d().unwrap().values(&[0.3, -0.2]).unwrap(), vec![1.0]);
    }

    #[test]
    fn d_of_scalar() {
        let c = xy();
        let f = TensorField::scalar(&c, c.parse("x^2*y").unwrap()).unwrap();
        let df = f.d().unwrap().values(&[0.5, -0.4]).unwrap();
        assert!(close(&df, &[2.0 * 0.5 * -0.4, 0.25], 1e-15));
    }

    #[test]
    fn d_of_hopf_connection_form_at_origin() {
        let c = xy();
        let a = TensorField::one_form(&c, &["-y/(1 + x^2 + y^2)", "x/(1 + x^2 + y^2)"]).unwrap();
        let v = a.d().unwrap().values(&[0.0, 0.0]).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn brackets_of_simple_fields() {
        let c = xy();
        let dx = TensorField::coordinate_vector(&c, 0).unwrap();
        let dy = TensorField::coordinate_vector(&c, 1).unwrap();
        assert_eq!(dx.lie_bracket(&dy).unwrap().values(&[0.1, 0.2]).unwrap(), vec![0.0, 0.0]);
        let x = TensorField::vector(&c, &["0", "x"]).unwrap();
        let y = TensorField::vector(&c, &["y", "0"]).unwrap();
        let b = x.lie_bracket(&y).unwrap().values(&[0.3, 0.7]).unwrap();
        assert!(close(&b, &[0.3, -0.7], 1e-15));
    }

    #[test]
    fn lie_derivative_of_translated_bivector() {
        let c = xyz();
        let dx = TensorField::coordinate_vector(&c, 0).unwrap();
        // components (xy, xz, yz)
        let t = TensorField::parse(&c, Variance::Contravariant, 2, &["0", "0", "x"]).unwrap();
        let l = dx.lie_derivative(&t).unwrap().values(&[0.2, 0.3, 0.4]).unwrap();
        assert!(close(&l, &[0.0, 0.0, 1.0], 1e-15));
    }

    #[test]
    fn su2_structure_is_rotation_invariant_and_poisson() {
        let c = xyz();
        let pi = TensorField::parse(&c, Variance::Contravariant, 2, &["z", "-y", "x"]).unwrap();
        let rot = TensorField::vector(&c, &["y", "-x", "0"]).unwrap();
        let dz = TensorField::coordinate_form(&c, 2).unwrap();
        let p = [0.3, -0.5, 0.8];
        assert!(close(&pi.sharp(&dz).unwrap().values(&p).unwrap(), &[p[1], -p[0], 0.0], 1e-15));
        assert!(close(&rot.lie_derivative(&pi).unwrap().values(&p).unwrap(), &[0.0; 3], 1e-14));
        assert!(close(&pi.schouten_square().unwrap().values(&p).unwrap(), &[0.0], 1e-14));
    }

    #[test]
    fn schouten_square_detects_non_poisson() {
        let c = xyz();
        // {x,y} = y, {y,z} = x, {z,x} = 0: the Jacobiator on (x, y, z) is -x.
        let pi = TensorField::parse(&c, Variance::Contravariant, 2, &["y", "0", "x"]).unwrap();
        let s = pi.schouten_square().unwrap().values(&[0.9, 0.2, 0.3]).unwrap();
        assert!((s[0] + 0.9).abs() < 1e-14);
    }

    #[test]
    fn interior_and_evaluation() {
        let c = xy();
        let area = TensorField::parse(&c, Variance::Covariant, 2, &["1"]).unwrap();
        let dx = TensorField::coordinate_vector(&c, 0).unwrap();
        let dy = TensorField::coordinate_vector(&c, 1).unwrap();
        assert_eq!(dx.interior(&area).unwrap().values(&[0.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(
            area.evaluate_form(&[&dy, &dx]).unwrap().values(&[0.0, 0.0]).unwrap(),
            vec![-1.0]
        );
    }

    #[test]
    fn shape_errors_surface_at_construction() {
        let c = xy();
        let a = TensorField::one_form(&c, &["x", "y"]).unwrap();
        let x = TensorField::vector(&c, &["x", "y"]).unwrap();
        assert!(matches!(a.lie_bracket(&x), Err(Error::Degree(_))));
        assert!(matches!(x.d(), Err(Error::Degree(_))));
        let other = xyz();
        let b = TensorField::one_form(&other, &["x", "y", "z"]).unwrap();
        assert!(matches!(a.add(&b), Err(Error::ChartMismatch)));
    }

    #[test]
    fn nested_operators_need_enough_order() {
        let c = xy();
        let f = TensorField::scalar(&c, c.parse("x^3*y").unwrap()).unwrap();
        let ddf = f.d().unwrap().d().unwrap();
        assert_eq!(ddf.values(&[0.4, 0.1]).unwrap(), vec![0.0]);
        assert!(matches!(
            ddf.eval(&[0.4, 0.1], 1),
            Err(Error::OrderExceeded { .. })
        ));
    }
}
