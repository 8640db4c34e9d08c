use super::{assemble, DiracTriple, Generator, TripleJets};
use crate::calculus::pointwise::{self as pw, FieldJet, Variance};
use crate::calculus::TensorField;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::distance_to_span;

/// Sections fed to the obstruction tensor must lie this close to `L`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A pair `(X, alpha)` of a vector field and a 1-form on the total chart.
#[derive(Clone, Debug)]
pub struct Section {
    pub x: TensorField,
    pub alpha: TensorField,
}

impl Section {
    pub fn new(x: TensorField, alpha: TensorField) -> Result<Self> {
        if x.variance() != Variance::Contravariant || x.degree() != 1 {
            return Err(Error::Degree("section vector part must be a vector field".into()));
        }
        if alpha.variance() != Variance::Covariant || alpha.degree() != 1 {
            return Err(Error::Degree("section form part must be a 1-form".into()));
        }
        x.same_chart(&alpha)?;
        Ok(Section { x, alpha })
    }

    pub fn eval(&self, point: &[f64], order: u8) -> Result<SectionJet> {
        Ok(SectionJet {
            x: self.x.eval(point, order)?,
            alpha: self.alpha.eval(point, order)?,
        })
    }

    /// `(f X, f alpha)` for a scalar field `f`.
    pub fn times(&self, f: &TensorField) -> Result<Section> {
        Section::new(self.x.times(f)?, self.alpha.times(f)?)
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        Section::new(self.x.add(&other.x)?, self.alpha.add(&other.alpha)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionJet {
    pub x: FieldJet,
    pub alpha: FieldJet,
}

impl SectionJet {
    /// Stacked `(X, alpha)` values.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.x.values();
        v.extend(self.alpha.values());
        v
    }

    pub fn truncate(&self, order: u8) -> SectionJet {
        SectionJet {
            x: self.x.truncate(order),
            alpha: self.alpha.truncate(order),
        }
    }
}

fn plus_jet(s1: &SectionJet, s2: &SectionJet) -> Result<Jet> {
    Ok((&pw::pair(&s1.alpha, &s2.x)? + &pw::pair(&s2.alpha, &s1.x)?).scale(0.5))
}

fn minus_jet(s1: &SectionJet, s2: &SectionJet) -> Result<Jet> {
    Ok((&pw::pair(&s1.alpha, &s2.x)? - &pw::pair(&s2.alpha, &s1.x)?).scale(0.5))
}

/// `<s1, s2>_+ = (alpha(Y) + beta(X)) / 2` at `point`.
pub fn pairing_plus(s1: &Section, s2: &Section, point: &[f64]) -> Result<f64> {
    Ok(plus_jet(&s1.eval(point, 0)?, &s2.eval(point, 0)?)?.value())
}

/// `<s1, s2>_- = (alpha(Y) - beta(X)) / 2` at `point`.
pub fn pairing_minus(s1: &Section, s2: &Section, point: &[f64]) -> Result<f64> {
    Ok(minus_jet(&s1.eval(point, 0)?, &s2.eval(point, 0)?)?.value())
}

/// `[[s1, s2]] = ([X, Y], L_X beta - L_Y alpha + d<s1, s2>_-)`.
pub fn courant_bracket(s1: &Section, s2: &Section) -> Result<Section> {
    let x = s1.x.lie_bracket(&s2.x)?;
    let minus = s1
        .alpha
        .evaluate_form(&[&s2.x])?
        .sub(&s2.alpha.evaluate_form(&[&s1.x])?)?
        .scale(0.5)?;
    let alpha = s1
        .x
        .lie_derivative(&s2.alpha)?
        .sub(&s2.x.lie_derivative(&s1.alpha)?)?
        .add(&minus.d()?)?;
    Section::new(x, alpha)
}

/// Pointwise Courant bracket; the result is one order below the inputs.
pub fn courant_bracket_jets(s1: &SectionJet, s2: &SectionJet) -> Result<SectionJet> {
    let x = pw::lie_bracket(&s1.x, &s2.x)?;
    let lx_beta = pw::lie_derivative(&s1.x, &s2.alpha)?;
    let ly_alpha = pw::lie_derivative(&s2.x, &s1.alpha)?;
    let dm = pw::differential(&minus_jet(s1, s2)?)?;
    let alpha = pw::add(&pw::sub(&lx_beta, &ly_alpha)?, &dm)?;
    Ok(SectionJet { x, alpha })
}

/// `T_L(s1, s2, s3) = <[[s1, s2]], s3>_+` at `point`, after checking that
/// every section takes values in the subspace assembled from `triple`.
pub fn t_direct(
    triple: &DiracTriple,
    s1: &Section,
    s2: &Section,
    s3: &Section,
    point: &[f64],
) -> Result<f64> {
    let l = assemble(triple, point)?;
    let basis = l.matrix();
    for s in [s1, s2, s3] {
        let v = s.eval(point, 0)?.values();
        let scale = v.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let distance = distance_to_span(&basis, &v);
        if distance > MEMBERSHIP_TOL * scale {
            return Err(Error::SectionNotInL {
                point: point.to_vec(),
                distance,
            });
        }
    }
    let b = courant_bracket(s1, s2)?.eval(point, 0)?;
    Ok(plus_jet(&b, &s3.eval(point, 0)?)?.value())
}

/// `T_L` on every ordered triple of generators at one point, flattened as
/// `[(g1 * N + g2) * N + g3]` in [`DiracTriple::generators`] order.
pub fn t_direct_table(triple: &DiracTriple, point: &[f64]) -> Result<Vec<f64>> {
    let jets = triple.jets(point, 1)?;
    t_direct_table_from(&jets, &triple.generators())
}

pub(crate) fn t_direct_table_from(jets: &TripleJets, gens: &[Generator]) -> Result<Vec<f64>> {
    let sections: Vec<SectionJet> = gens.iter().map(|&g| jets.section(g)).collect();
    let flat: Vec<SectionJet> = sections.iter().map(|s| s.truncate(0)).collect();
    let n = gens.len();
    let mut out = Vec::with_capacity(n * n * n);
    for s1 in &sections {
        for s2 in &sections {
            let b = courant_bracket_jets(s1, s2)?;
            for s3 in &flat {
                out.push(plus_jet(&b, s3)?.value());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Chart;

    fn xy() -> std::sync::Arc<Chart> {
        Chart::from_box(&[("x", -1.0, 1.0), ("y", -1.0, 1.0)]).unwrap()
    }

    #[test]
    fn pairings() {
        let c = xy();
        let dx = TensorField::coordinate_vector(&c, 0).unwrap();
        let ex = TensorField::coordinate_form(&c, 0).unwrap();
        let s = Section::new(dx, ex).unwrap();
        let p = [0.2, 0.1];
        assert_eq!(pairing_plus(&s, &s, &p).unwrap(), 1.0);
        assert_eq!(pairing_minus(&s, &s, &p).unwrap(), 0.0);
    }

    #[test]
    fn bracket_of_pure_vector_and_pure_form_sections() {
        let c = xy();
        let zero_v = TensorField::vector(&c, &["0", "0"]).unwrap();
        let zero_f = TensorField::one_form(&c, &["0", "0"]).unwrap();
        let x = Section::new(TensorField::vector(&c, &["0", "x"]).unwrap(), zero_f.clone()).unwrap();
        let y = Section::new(TensorField::vector(&c, &["y", "0"]).unwrap(), zero_f).unwrap();
        let b = courant_bracket(&x, &y).unwrap().eval(&[0.3, 0.7], 0).unwrap();
        assert_eq!(b.x.values(), vec![0.3, -0.7]);
        assert_eq!(b.alpha.values(), vec![0.0, 0.0]);

        let f = TensorField::scalar(&c, c.parse("x^2*y").unwrap()).unwrap();
        let g = TensorField::scalar(&c, c.parse("sin(x + y)").unwrap()).unwrap();
        let df = Section::new(zero_v.clone(), f.d().unwrap()).unwrap();
        let dg = Section::new(zero_v, g.d().unwrap()).unwrap();
        let b = courant_bracket(&df, &dg).unwrap().eval(&[0.3, 0.7], 0).unwrap();
        assert_eq!(b.values(), vec![0.0; 4]);
    }
}
