//! JSON model and gauge files.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{Chart, Interval, TensorField, Variance};
use crate::dirac::{
    graph_of_poisson, graph_of_presymplectic, graph_report, integrability_report, DiracTriple,
    GraphModel, IntegrabilityReport, SamplePlan, Verdict,
};
use crate::error::{Error, Result};
use crate::expr::pretty_print;
use crate::fibration::{blend_triples, FibrationChart, PartitionOfUnity};
use crate::gauge::{build_coupling, triple_exprs, HamiltonianAction, LieAlgebraData, PrincipalConnectionChart};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub coords: Vec<String>,
    pub domain: Vec<[f64; 2]>,
}

impl ChartSpec {
    pub fn build(&self) -> Result<Arc<Chart>> {
        if self.coords.len() != self.domain.len() {
            return Err(Error::Schema(format!(
                "{} coordinates but {} domain intervals",
                self.coords.len(),
                self.domain.len()
            )));
        }
        let domain = self
            .domain
            .iter()
            .map(|[lo, hi]| Interval::new(*lo, *hi))
            .collect::<Result<_>>()?;
        Chart::new(self.coords.clone(), domain)
    }

    fn of(chart: &Chart) -> ChartSpec {
        ChartSpec {
            coords: chart.names().to_vec(),
            domain: chart.domain().iter().map(|iv| [iv.lo, iv.hi]).collect(),
        }
    }
}

/// Expected outcome stored with a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub conditions: BTreeMap<String, bool>,
}

impl Expectation {
    pub fn matches(&self, r: &IntegrabilityReport) -> bool {
        self.verdict == r.verdict
            && self
                .conditions
                .iter()
                .all(|(k, pass)| r.conditions.get(k).is_some_and(|c| c.pass == *pass))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub connection: Vec<Vec<String>>,
    #[serde(default)]
    pub omega: Vec<String>,
    #[serde(default)]
    pub pi: Vec<String>,
}

impl TripleSpec {
    fn build(&self, chart: &FibrationChart) -> Result<DiracTriple> {
        let rows: Vec<Vec<&str>> = self
            .connection
            .iter()
            .map(|r| r.iter().map(String::as_str).collect())
            .collect();
        let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
        DiracTriple::parse(chart, &rows, &strs(&self.omega), &strs(&self.pi))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlendSpec {
    pub weights: Vec<String>,
    pub members: Vec<TripleSpec>,
}

/// A model given by a triple, a blend of triples, or a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub base: ChartSpec,
    pub fiber: ChartSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blend: Option<BlendSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson_graph: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presymplectic_graph: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieAlgebraSpec {
    pub dim: usize,
    pub structure_constants: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeFiberSpec {
    pub coords: Vec<String>,
    pub domain: Vec<[f64; 2]>,
    pub pi: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub generators: Vec<Vec<String>>,
    pub moments: Vec<String>,
}

/// A principal connection with a Hamiltonian action on a Poisson fiber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub base: ChartSpec,
    pub lie_algebra: LieAlgebraSpec,
    /// `A[k][i]`.
    pub connection: Vec<Vec<String>>,
    pub fiber: GaugeFiberSpec,
    pub action: ActionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

/// Gauge data ready for coupling.
#[derive(Clone, Debug)]
pub struct GaugeData {
    pub connection: PrincipalConnectionChart,
    pub algebra: LieAlgebraData,
    pub action: HamiltonianAction,
}

impl GaugeFile {
    pub fn build(&self) -> Result<GaugeData> {
        check_version(self.version)?;
        let base = self.base.build()?;
        let fiber = ChartSpec {
            coords: self.fiber.coords.clone(),
            domain: self.fiber.domain.clone(),
        }
        .build()?;
        let algebra = LieAlgebraData::new(self.lie_algebra.dim, &self.lie_algebra.structure_constants)?;
        let rows: Vec<Vec<&str>> = self
            .connection
            .iter()
            .map(|r| r.iter().map(String::as_str).collect())
            .collect();
        let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
        let connection = PrincipalConnectionChart::parse(base, &rows)?;
        let gens: Vec<Vec<&str>> = self.action.generators.iter().map(|g| strs(g)).collect();
        let gens: Vec<&[&str]> = gens.iter().map(Vec::as_slice).collect();
        let action = HamiltonianAction::parse(
            fiber,
            &strs(&self.fiber.pi),
            &gens,
            &strs(&self.action.moments),
        )?;
        Ok(GaugeData {
            connection,
            algebra,
            action,
        })
    }
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported version {v}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// Either kind of input file, told apart by the `lie_algebra` key.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Model(ModelFile),
    Gauge(GaugeFile),
}

impl Document {
    pub fn parse(text: &str) -> Result<Document> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let is_gauge = value.get("lie_algebra").is_some();
        Ok(if is_gauge {
            Document::Gauge(serde_json::from_value(value)?)
        } else {
            Document::Model(serde_json::from_value(value)?)
        })
    }

    pub fn id(&self) -> Option<&str> {
        match self {
            Document::Model(m) => m.id.as_deref(),
            Document::Gauge(g) => g.id.as_deref(),
        }
    }

    pub fn description(&self) -> Option<&str> {
        match self {
            Document::Model(m) => m.description.as_deref(),
            Document::Gauge(g) => g.description.as_deref(),
        }
    }

    pub fn expectation(&self) -> Option<&Expectation> {
        match self {
            Document::Model(m) => m.expect.as_ref(),
            Document::Gauge(g) => g.expect.as_ref(),
        }
    }

    /// Builds the model; gauge documents become their coupling triple.
    pub fn build(&self, fallback_id: &str) -> Result<Model> {
        let id = self.id().unwrap_or(fallback_id).to_string();
        let kind = match self {
            Document::Model(m) => m.build_kind()?,
            Document::Gauge(g) => {
                let d = g.build()?;
                ModelKind::Triple(build_coupling(&d.connection, &d.algebra, &d.action)?)
            }
        };
        Ok(Model {
            id,
            kind,
            expect: self.expectation().cloned(),
        })
    }
}

impl ModelFile {
    fn build_kind(&self) -> Result<ModelKind> {
        check_version(self.version)?;
        let chart = FibrationChart::new(self.base.build()?, self.fiber.build()?)?;
        let triple_fields = self.connection.is_some() || self.omega.is_some() || self.pi.is_some();
        let forms = [
            triple_fields,
            self.blend.is_some(),
            self.poisson_graph.is_some(),
            self.presymplectic_graph.is_some(),
        ];
        if forms.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::Schema(
                "a model needs exactly one of connection/omega/pi, blend, poisson_graph or presymplectic_graph"
                    .into(),
            ));
        }
        let graph_field = |src: &[String], variance| -> Result<TensorField> {
            let s: Vec<&str> = src.iter().map(String::as_str).collect();
            TensorField::parse(chart.total(), variance, 2, &s)
        };
        if let Some(p) = &self.poisson_graph {
            return Ok(ModelKind::Graph(graph_of_poisson(
                &chart,
                &graph_field(p, Variance::Contravariant)?,
            )?));
        }
        if let Some(w) = &self.presymplectic_graph {
            return Ok(ModelKind::Graph(graph_of_presymplectic(
                &chart,
                &graph_field(w, Variance::Covariant)?,
            )?));
        }
        if let Some(b) = &self.blend {
            let w: Vec<&str> = b.weights.iter().map(String::as_str).collect();
            let pou = PartitionOfUnity::parse(&chart, &w)?;
            let members = b
                .members
                .iter()
                .map(|m| m.build(&chart))
                .collect::<Result<Vec<_>>>()?;
            return Ok(ModelKind::Triple(blend_triples(&pou, &members)?));
        }
        let spec = TripleSpec {
            connection: self
                .connection
                .clone()
                .ok_or_else(|| Error::Schema("missing `connection`".into()))?,
            omega: self.omega.clone().unwrap_or_default(),
            pi: self.pi.clone().unwrap_or_default(),
        };
        Ok(ModelKind::Triple(spec.build(&chart)?))
    }

    /// A triple-form model file, if every coefficient is an expression.
    pub fn from_triple(id: &str, description: Option<String>, triple: &DiracTriple) -> Option<ModelFile> {
        let (gamma, omega, pi) = triple_exprs(triple)?;
        let c = triple.chart();
        let names = c.total().names();
        let show = |v: &[crate::expr::Expr]| v.iter().map(|e| pretty_print(e, names)).collect::<Vec<_>>();
        Some(ModelFile {
            version: SCHEMA_VERSION,
            id: Some(id.to_string()),
            description,
            base: ChartSpec::of(c.base()),
            fiber: ChartSpec::of(c.fiber()),
            connection: Some(gamma.iter().map(|r| show(r)).collect()),
            omega: Some(show(&omega)),
            pi: Some(show(&pi)),
            blend: None,
            poisson_graph: None,
            presymplectic_graph: None,
            expect: None,
        })
    }
}

#[derive(Clone, Debug)]
pub enum ModelKind {
    Triple(DiracTriple),
    Graph(GraphModel),
}

/// A loaded model with its identifier and optional expectation.
#[derive(Clone, Debug)]
pub struct Model {
    pub id: String,
    pub kind: ModelKind,
    pub expect: Option<Expectation>,
}

impl Model {
    pub fn chart(&self) -> &FibrationChart {
        match &self.kind {
            ModelKind::Triple(t) => t.chart(),
            ModelKind::Graph(g) => g.chart(),
        }
    }

    /// The triple, extracted on demand for graph models.
    pub fn triple(&self) -> Result<DiracTriple> {
        match &self.kind {
            ModelKind::Triple(t) => Ok(t.clone()),
            ModelKind::Graph(g) => g.to_triple(),
        }
    }

    pub fn report(&self, plan: &SamplePlan, tolerance: f64) -> Result<IntegrabilityReport> {
        match &self.kind {
            ModelKind::Triple(t) => integrability_report(t, plan, tolerance),
            ModelKind::Graph(g) => graph_report(g, plan, tolerance),
        }
    }
}
