use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("function `{function}` takes {expected} argument(s), found {found} at {line}:{column}")]
    Arity {
        function: String,
        expected: usize,
        found: usize,
        line: usize,
        column: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("derivative order {requested} exceeds the configured maximum {available}")]
    OrderExceeded { requested: u8, available: u8 },

    #[error("fields live on different charts")]
    ChartMismatch,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degree mismatch: {0}")]
    Degree(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("base vector field depends on fiber coordinate `{0}`")]
    FiberDependence(String),

    #[error("transport left the chart domain at t = {t:.6} (state {state:?})")]
    DomainEscape { t: f64, state: Vec<f64> },

    #[error("step {step} too coarse: step-halving disagreement {disagreement:.3e} exceeds {tolerance:.3e}")]
    StepTooCoarse {
        step: f64,
        disagreement: f64,
        tolerance: f64,
    },

    #[error("loop is not closed: |gamma(1) - gamma(0)| = {0:.3e}")]
    OpenLoop(f64),

    #[error("partition-of-unity weights sum to {sum} at {point:?}")]
    WeightSum { sum: f64, point: Vec<f64> },

    #[error("blended triples do not share the same vertical bivector")]
    PiMismatch,

    #[error("subspace is fiber-degenerate at {point:?} (intersection dimension {intersection_dim})")]
    Degenerate {
        point: Vec<f64>,
        intersection_dim: usize,
    },

    #[error("section is not in L at {point:?} (distance {distance:.3e})")]
    SectionNotInL { point: Vec<f64>, distance: f64 },

    #[error("unrecognized generator: {0}")]
    UnknownGenerator(String),

    #[error("invalid Lie algebra data: {0}")]
    LieAlgebra(String),

    #[error("Hamiltonian action check failed: {0}")]
    Hamiltonian(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownModel(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
