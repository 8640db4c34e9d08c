//! Parallel transport along base loops by classical RK4.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::ConnectionCoeffs;
use crate::calculus::pointwise::{FieldJet, Variance};
use crate::calculus::FieldSource;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Func};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Allowed disagreement between transports at `h` and `h/2`.
pub const DEFAULT_HALVING_TOL: f64 = 1e-8;
/// Allowed mismatch between the two ends of a loop.
pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
struct Segment {
    /// Components as expressions of the local parameter `s` in `[0, 1]`.
    components: Vec<Expr>,
    reversed: bool,
}

impl Segment {
    fn eval(&self, s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (s, sign) = if self.reversed { (1.0 - s, -1.0) } else { (s, 1.0) };
        let mut x = Vec::with_capacity(self.components.len());
        let mut v = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let j = c.eval_jet(&[s], 1)?;
            x.push(j.value());
            v.push(sign * j.partial(0)?);
        }
        Ok((x, v))
    }
}

/// A closed piecewise-smooth base loop parametrized by `t` in `[0, 1]`, with
/// segments traversed at equal parameter length.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopPath {
    segments: Vec<Segment>,
}

impl LoopPath {
    fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        let dim = segments.first().map_or(0, |s| s.components.len());
        if dim == 0 || segments.iter().any(|s| s.components.len() != dim) {
            return Err(Error::Dimension("loop segments disagree in dimension".into()));
        }
        for s in &segments {
            if s.components.iter().any(|e| e.max_var().is_some_and(|v| v > 0)) {
                return Err(Error::Dimension("loop components may only use t".into()));
            }
        }
        let path = LoopPath { segments };
        let k = path.segments.len();
        for i in 0..k {
            let end = path.segments[i].eval(1.0)?.0;
            let start = path.segments[(i + 1) % k].eval(0.0)?.0;
            let gap = end
                .iter()
                .zip(&start)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap > CLOSURE_TOL {
                return Err(Error::OpenLoop(gap));
            }
        }
        Ok(path)
    }

    /// A smooth loop with one expression in `t` per base coordinate.
    pub fn from_exprs(components: Vec<Expr>) -> Result<Self> {
        LoopPath::from_segments(vec![Segment {
            components,
            reversed: false,
        }])
    }

    pub fn parse(components: &[&str]) -> Result<Self> {
        let t = ["t".to_string()];
        let exprs = components
            .iter()
            .map(|c| parse(c, &t))
            .collect::<Result<_>>()?;
        LoopPath::from_exprs(exprs)
    }

    /// Counter-clockwise circle in the coordinate plane `(p, q)`; the other
    /// coordinates stay at `center`.
    pub fn circle(center: &[f64], radius: f64, plane: (usize, usize)) -> Result<Self> {
        check_plane(center.len(), plane)?;
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("circle radius {radius}")));
        }
        let angle = Expr::mul(Expr::num(std::f64::consts::TAU), Expr::var(0));
        let comps = center
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let wave = if k == plane.0 {
                    Func::Cos
                } else if k == plane.1 {
                    Func::Sin
                } else {
                    return Expr::num(c);
                };
                Expr::add(
                    Expr::num(c),
                    Expr::mul(Expr::num(radius), Expr::call(wave, vec![angle.clone()])),
                )
            })
            .collect();
        LoopPath::from_exprs(comps)
    }

    /// Counter-clockwise axis-aligned rectangle in the plane `(p, q)`.
    pub fn rectangle(center: &[f64], half_widths: (f64, f64), plane: (usize, usize)) -> Result<Self> {
        check_plane(center.len(), plane)?;
        let (w, h) = half_widths;
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::Domain("rectangle half-widths must be positive".into()));
        }
        let corners = [(-w, -h), (w, -h), (w, h), (-w, h)];
        let segments = (0..4)
            .map(|k| {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                let comps = center
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        let (from, to) = if i == plane.0 {
                            (c + a.0, c + b.0)
                        } else if i == plane.1 {
                            (c + a.1, c + b.1)
                        } else {
                            return Expr::num(c);
                        };
                        // from + (to - from) s
                        Expr::add(Expr::num(from), Expr::mul(Expr::num(to - from), Expr::var(0)))
                    })
                    .collect();
                Segment {
                    components: comps,
                    reversed: false,
                }
            })
            .collect();
        LoopPath::from_segments(segments)
    }

    pub fn reversed(&self) -> LoopPath {
        LoopPath {
            segments: self
                .segments
                .iter()
                .rev()
                .map(|s| Segment {
                    components: s.components.clone(),
                    reversed: !s.reversed,
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.segments[0].components.len()
    }

    pub fn position(&self, t: f64) -> Result<Vec<f64>> {
        let k = self.segments.len();
        let scaled = (t.clamp(0.0, 1.0) * k as f64).min(k as f64 - 1e-300);
        let i = (scaled.floor() as usize).min(k - 1);
        Ok(self.segments[i].eval(scaled - i as f64)?.0)
    }
}

fn check_plane(dim: usize, plane: (usize, usize)) -> Result<()> {
    if plane.0 >= dim || plane.1 >= dim || plane.0 == plane.1 {
        return Err(Error::Dimension(format!(
            "plane {plane:?} in a {dim}-dimensional base"
        )));
    }
    Ok(())
}

/// Fiber samples transported around one base loop.
#[derive(Clone, Debug)]
pub struct HolonomyProbe {
    pub path: LoopPath,
    pub step: f64,
    pub fiber_points: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl HolonomyProbe {
    pub fn new(path: LoopPath, fiber_points: Vec<Vec<f64>>) -> Self {
        HolonomyProbe {
            path,
            step: DEFAULT_STEP,
            fiber_points,
            tolerance: DEFAULT_HALVING_TOL,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportSample {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Max-norm difference between the runs at `h` and `h/2`.
    pub disagreement: f64,
    /// Max-norm distance between `start` and `end`.
    pub displacement: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub per_point: Vec<f64>,
    pub max_displacement: f64,
}

struct Integrator<'a> {
    gamma: &'a ConnectionCoeffs,
    path: &'a LoopPath,
    jacobian: bool,
}

impl Integrator<'_> {
    fn rhs(&self, seg: usize, s: f64, state: &[f64]) -> Result<Vec<f64>> {
        let chart = self.gamma.chart();
        let (n, m) = (chart.base_dim(), chart.fiber_dim());
        let k = self.path.segments.len();
        // integration runs in the segment's own parameter s
        let (x, xdot) = self.path.segments[seg].eval(s)?;
        let point = chart.join(&x, &state[..m]);
        if !chart.total().contains(&point) || state.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainEscape {
                t: (seg as f64 + s) / k as f64,
                state: point,
            });
        }
        let g = self.gamma.eval(&point, if self.jacobian { 1 } else { 0 })?;
        let mut out = vec![0.0; state.len()];
        for a in 0..m {
            out[a] = (0..n).map(|i| g[i * m + a].value() * xdot[i]).sum();
        }
        if self.jacobian {
            let mut jac = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    jac[a * m + b] = (0..n)
                        .map(|i| g[i * m + a].partial(n + b).map(|d| d * xdot[i]))
                        .sum::<Result<f64>>()?;
                }
            }
            let j = &state[m..];
            for a in 0..m {
                for c in 0..m {
                    out[m + a * m + c] = (0..m).map(|b| jac[a * m + b] * j[b * m + c]).sum();
                }
            }
        }
        Ok(out)
    }

    /// Integrates over the whole loop with global step about `step`.
    fn run(&self, mut state: Vec<f64>, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::Domain(format!("integrator step {step}")));
        }
        let k = self.path.segments.len();
        let per_segment = ((1.0 / (k as f64 * step)).round() as usize).max(1);
        let h = 1.0 / per_segment as f64;
        let axpy = |y: &[f64], c: f64, d: &[f64]| -> Vec<f64> {
            y.iter().zip(d).map(|(a, b)| a + c * b).collect()
        };
        for seg in 0..k {
            for i in 0..per_segment {
                let s = i as f64 * h;
                let k1 = self.rhs(seg, s, &state)?;
                let k2 = self.rhs(seg, s + 0.5 * h, &axpy(&state, 0.5 * h, &k1))?;
                let k3 = self.rhs(seg, s + 0.5 * h, &axpy(&state, 0.5 * h, &k2))?;
                let k4 = self.rhs(seg, s + h, &axpy(&state, h, &k3))?;
                for (q, st) in state.iter_mut().enumerate() {
                    *st += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
                }
            }
        }
        Ok(state)
    }
}

fn check_probe(gamma: &ConnectionCoeffs, path: &LoopPath) -> Result<()> {
    let n = gamma.chart().base_dim();
    if path.dim() != n {
        return Err(Error::Dimension(format!(
            "loop has {} components, base has dimension {n}",
            path.dim()
        )));
    }
    Ok(())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Transport of one fiber point around `path` with a single step size.
pub fn transport_point(
    gamma: &ConnectionCoeffs,
    path: &LoopPath,
    y0: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    check_probe(gamma, path)?;
    if y0.len() != gamma.chart().fiber_dim() {
        return Err(Error::Dimension("fiber point".into()));
    }
    Integrator {
        gamma,
        path,
        jacobian: false,
    }
    .run(y0.to_vec(), step)
}

/// Transports every fiber sample at steps `h` and `h/2`, returning the finer
/// result and failing when the two disagree beyond the probe tolerance.
pub fn parallel_transport(probe: &HolonomyProbe, gamma: &ConnectionCoeffs) -> Result<Vec<TransportSample>> {
    check_probe(gamma, &probe.path)?;
    probe
        .fiber_points
        .par_iter()
        .map(|y0| {
            let coarse = transport_point(gamma, &probe.path, y0, probe.step)?;
            let fine = transport_point(gamma, &probe.path, y0, 0.5 * probe.step)?;
            let disagreement = max_diff(&coarse, &fine);
            if disagreement > probe.tolerance {
                return Err(Error::StepTooCoarse {
                    step: probe.step,
                    disagreement,
                    tolerance: probe.tolerance,
                });
            }
            Ok(TransportSample {
                start: y0.clone(),
                displacement: max_diff(y0, &fine),
                end: fine,
                disagreement,
            })
        })
        .collect()
}

fn dense_bivector(pi: &dyn FieldSource, point: &[f64], m: usize) -> Result<DMatrix<f64>> {
    let coeffs = pi.eval(point, 0)?;
    let f = FieldJet::new(Variance::Contravariant, 2, m, coeffs)?;
    Ok(DMatrix::from_row_slice(m, m, &f.to_dense()))
}

/// Max componentwise difference between the pushforward of `pi` by the
/// holonomy map and `pi` itself, per fiber sample. The Jacobian comes from
/// the variational equation integrated alongside the transport.
pub fn holonomy_poisson_residual(
    probe: &HolonomyProbe,
    gamma: &ConnectionCoeffs,
    pi: &dyn FieldSource,
) -> Result<ResidualStats> {
    check_probe(gamma, &probe.path)?;
    let chart = gamma.chart();
    let m = chart.fiber_dim();
    let x0 = probe.path.position(0.0)?;
    let integ = Integrator {
        gamma,
        path: &probe.path,
        jacobian: true,
    };
    let rows: Vec<(f64, f64)> = probe
        .fiber_points
        .par_iter()
        .map(|y0| {
            let mut state = y0.clone();
            state.extend(DMatrix::<f64>::identity(m, m).iter());
            let coarse = integ.run(state.clone(), probe.step)?;
            let fine = integ.run(state, 0.5 * probe.step)?;
            let disagreement = max_diff(&coarse[..m], &fine[..m]);
            if disagreement > probe.tolerance {
                return Err(Error::StepTooCoarse {
                    step: probe.step,
                    disagreement,
                    tolerance: probe.tolerance,
                });
            }
            let y1 = &fine[..m];
            // state stores J row-major; nalgebra reads column-major
            let j = DMatrix::from_row_slice(m, m, &fine[m..]);
            let p0 = dense_bivector(pi, &chart.join(&x0, y0), m)?;
            let p1 = dense_bivector(pi, &chart.join(&x0, y1), m)?;
            let pushed = &j * p0 * j.transpose();
            let r = (pushed - p1).abs().max();
            Ok((r, max_diff(y0, y1)))
        })
        .collect::<Result<_>>()?;
    let per_point: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let max = per_point.iter().cloned().fold(0.0, f64::max);
    let mean = if per_point.is_empty() {
        0.0
    } else {
        per_point.iter().sum::<f64>() / per_point.len() as f64
    };
    Ok(ResidualStats {
        max,
        mean,
        per_point,
        max_displacement: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

/// `|y(h) - y(h/2)| / |y(h/2) - y(h/4)|`, which tends to 16 for a
/// fourth-order method.
pub fn convergence_ratio(gamma: &ConnectionCoeffs, path: &LoopPath, y0: &[f64], h: f64) -> Result<f64> {
    let a = transport_point(gamma, path, y0, h)?;
    let b = transport_point(gamma, path, y0, 0.5 * h)?;
    let c = transport_point(gamma, path, y0, 0.25 * h)?;
    Ok(max_diff(&a, &b) / max_diff(&b, &c))
}
