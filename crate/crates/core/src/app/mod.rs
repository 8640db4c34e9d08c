//! Catalog, run configuration and report emission behind the CLI.

mod catalog;
mod model;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

pub use catalog::{catalog_get, catalog_list, CatalogEntry};
pub use model::{
    ActionSpec, BlendSpec, ChartSpec, Document, Expectation, GaugeData, GaugeFiberSpec, GaugeFile,
    LieAlgebraSpec, Model, ModelFile, ModelKind, TripleSpec, SCHEMA_VERSION,
};

use crate::dirac::{
    ConditionStats, DegeneracyStats, IntegrabilityReport, SamplePlan, Verdict, CONDITION_NAMES,
};
use crate::error::{Error, Result};
use crate::fibration::{holonomy_poisson_residual, parallel_transport, HolonomyProbe, LoopPath};
use crate::gauge::{build_coupling, fatness_classify, moment_relation_check, Fatness};
use crate::sampling::{rng, sample_points};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Exit code for a run that could not complete.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::DomainEscape { .. }
        | Error::StepTooCoarse { .. }
        | Error::OrderExceeded { .. }
        | Error::Degenerate { .. }
        | Error::SectionNotInL { .. } => EXIT_DOMAIN,
        _ => EXIT_SCHEMA,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub step: f64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            samples: 200,
            seed: 0,
            tolerance: 1e-6,
            step: crate::fibration::DEFAULT_STEP,
            format: Format::Text,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Schema("sample count must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Schema(format!("tolerance {} must be positive", self.tolerance)));
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::Schema(format!("step {} must lie in (0, 1]", self.step)));
        }
        Ok(())
    }

    pub fn plan(&self) -> SamplePlan {
        SamplePlan {
            samples: self.samples,
            seed: self.seed,
        }
    }
}

/// A catalog id, or else a path to a model or gauge file.
pub fn load_model(spec: &str) -> Result<Model> {
    if let Ok(e) = catalog_get(spec) {
        return e.load();
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::UnknownModel(spec.to_string()));
    }
    let text = std::fs::read_to_string(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    Document::parse(&text)?.build(stem)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub version: u32,
    pub model_id: String,
    pub seed: u64,
    pub tolerance: f64,
    pub samples: usize,
    pub conditions: BTreeMap<String, ConditionStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber_degeneracy: Option<DegeneracyStats>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expectation>,
    /// Whether the run matches the expectation, or passes when there is none.
    pub ok: bool,
}

impl CheckReport {
    fn new(model: &Model, r: IntegrabilityReport) -> CheckReport {
        let ok = match &model.expect {
            Some(e) => e.matches(&r),
            None => r.verdict == Verdict::Dirac,
        };
        CheckReport {
            version: SCHEMA_VERSION,
            model_id: model.id.clone(),
            seed: r.seed,
            tolerance: r.tolerance,
            samples: r.samples,
            conditions: r.conditions,
            fiber_degeneracy: r.fiber_degeneracy,
            verdict: r.verdict,
            expected: model.expect.clone(),
            ok,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.ok {
            EXIT_OK
        } else {
            EXIT_MISMATCH
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "model {} ({} samples, seed {}, tolerance {:e})",
            self.model_id, self.samples, self.seed, self.tolerance
        );
        for (key, name) in CONDITION_NAMES {
            if let Some(c) = self.conditions.get(key) {
                let mark = if c.pass { "pass" } else { "FAIL" };
                let _ = writeln!(s, "  ({key:<3}) {mark}  max {:.3e}  mean {:.3e}  {name}", c.max, c.mean);
            }
        }
        if let Some(d) = &self.fiber_degeneracy {
            let _ = writeln!(
                s,
                "  fiber-degenerate at {}/{} points (max intersection dim {})",
                d.degenerate_points, d.samples, d.max_intersection_dim
            );
        }
        let _ = write!(s, "verdict: {}", verdict_name(self.verdict));
        if let Some(e) = &self.expected {
            let _ = write!(
                s,
                " (expected {}: {})",
                verdict_name(e.verdict),
                if self.ok { "match" } else { "MISMATCH" }
            );
        }
        s
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Dirac => "dirac",
        Verdict::NotDirac => "not_dirac",
        Verdict::FiberDegenerate => "fiber_degenerate",
    }
}

pub fn run_check(model: &Model, cfg: &RunConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let r = model.report(&cfg.plan(), cfg.tolerance)?;
    Ok(CheckReport::new(model, r))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FatnessSummary {
    pub poisson_points: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupleReport {
    pub version: u32,
    pub model_id: String,
    pub check: CheckReport,
    pub fatness: FatnessSummary,
    /// `max |omega_ij - mu_k F^k_ij|` with `F` recomputed independently.
    pub moment_relation: f64,
}

impl CoupleReport {
    pub fn to_text(&self) -> String {
        format!(
            "{}\nfat (Poisson) at {}/{} points; moment relation residual {:.3e}",
            self.check.to_text(),
            self.fatness.poisson_points,
            self.fatness.samples,
            self.moment_relation
        )
    }
}

/// Builds the coupling triple of a gauge file, checks it, and returns it as
/// a model file alongside the report.
pub fn run_couple(gauge: &GaugeFile, fallback_id: &str, cfg: &RunConfig) -> Result<(ModelFile, CoupleReport)> {
    cfg.validate()?;
    let d = gauge.build()?;
    let triple = build_coupling(&d.connection, &d.algebra, &d.action)?;
    let id = gauge.id.as_deref().unwrap_or(fallback_id).to_string();
    let description = Some(format!("coupling triple of {id}"));
    let file = ModelFile::from_triple(&format!("{id}_coupling"), description, &triple)
        .ok_or_else(|| Error::Schema("coupling triple has no expression form".into()))?;
    let model = Model {
        id: id.clone(),
        kind: ModelKind::Triple(triple.clone()),
        expect: gauge.expect.clone(),
    };
    let check = run_check(&model, cfg)?;
    let points = sample_points(triple.chart().total(), cfg.samples, cfg.seed);
    let poisson_points = points
        .iter()
        .map(|p| fatness_classify(&triple, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|f| *f == Fatness::Poisson)
        .count();
    let moment_relation =
        moment_relation_check(&triple, &d.connection, &d.algebra, &d.action, &cfg.plan())?;
    Ok((
        file,
        CoupleReport {
            version: SCHEMA_VERSION,
            model_id: id,
            check,
            fatness: FatnessSummary {
                poisson_points,
                samples: points.len(),
            },
            moment_relation,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopReport {
    pub kind: &'static str,
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolonomyReport {
    pub version: u32,
    pub model_id: String,
    #[serde(rename = "loop")]
    pub path: LoopReport,
    pub step: f64,
    pub fiber_points: usize,
    /// Largest `|h(y) - y|` over the fiber samples.
    pub max_displacement: f64,
    /// Largest disagreement between the runs at `step` and `step / 2`.
    pub max_disagreement: f64,
    /// Largest `|J pi(y) J^T - pi(h(y))|`.
    pub poisson_residual_max: f64,
    pub poisson_residual_mean: f64,
}

impl HolonomyReport {
    pub fn to_text(&self) -> String {
        format!(
            "model {} circle center {:?} radius {} step {:e}\n  {} fiber points: max displacement {:.3e}, step-halving {:.3e}\n  Poisson residual max {:.3e} mean {:.3e}",
            self.model_id,
            self.path.center,
            self.path.radius,
            self.step,
            self.fiber_points,
            self.max_displacement,
            self.max_disagreement,
            self.poisson_residual_max,
            self.poisson_residual_mean
        )
    }
}

/// Seeded fiber points in the middle half of the fiber box.
pub fn fiber_samples(model: &Model, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            model
                .chart()
                .fiber()
                .domain()
                .iter()
                .map(|iv| iv.mid() + 0.25 * iv.width() * (2.0 * r.random::<f64>() - 1.0))
                .collect()
        })
        .collect()
}

/// Transports seeded fiber points around a circle in the first two base
/// coordinates.
pub fn run_holonomy(
    model: &Model,
    center: &[f64],
    radius: f64,
    fiber_points: usize,
    cfg: &RunConfig,
) -> Result<HolonomyReport> {
    cfg.validate()?;
    let triple = model.triple()?;
    if center.len() != triple.chart().base_dim() || center.len() < 2 {
        return Err(Error::Dimension(format!(
            "circle center needs {} coordinates and the base at least 2",
            triple.chart().base_dim()
        )));
    }
    let path = LoopPath::circle(center, radius, (0, 1))?;
    let probe = HolonomyProbe::new(path, fiber_samples(model, fiber_points, cfg.seed)).with_step(cfg.step);
    let moved = parallel_transport(&probe, triple.gamma())?;
    let residual = holonomy_poisson_residual(&probe, triple.gamma(), triple.pi().as_ref())?;
    Ok(HolonomyReport {
        version: SCHEMA_VERSION,
        model_id: model.id.clone(),
        path: LoopReport {
            kind: "circle",
            center: center.to_vec(),
            radius,
        },
        step: cfg.step,
        fiber_points,
        max_displacement: moved.iter().map(|s| s.displacement).fold(0.0, f64::max),
        max_disagreement: moved.iter().map(|s| s.disagreement).fold(0.0, f64::max),
        poisson_residual_max: residual.max,
        poisson_residual_mean: residual.mean,
    })
}

/// Checks each catalog entry against its expectation.
pub fn run_examples(ids: &[&str], cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    ids.iter()
        .map(|id| run_check(&catalog_get(id)?.load()?, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = RunConfig {
            samples: 0,
            ..RunConfig::default()
        };
        assert_eq!(exit_code(&bad.validate().unwrap_err()), EXIT_SCHEMA);
        let bad = RunConfig {
            tolerance: -1.0,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unknown_model_is_a_schema_error() {
        let e = load_model("no_such_model_or_file").unwrap_err();
        assert_eq!(exit_code(&e), EXIT_SCHEMA);
    }

    #[test]
    fn text_report_lists_conditions() {
        let m = catalog_get("broken_curvature_identity").unwrap().load().unwrap();
        let cfg = RunConfig {
            samples: 10,
            ..RunConfig::default()
        };
        let r = run_check(&m, &cfg).unwrap();
        assert!(r.ok);
        let t = r.to_text();
        assert!(t.contains("(iv ) FAIL") && t.contains("verdict: not_dirac"), "{t}");
    }
}
