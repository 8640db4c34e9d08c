//! Coordinate calculus for Dirac structures on fibrations.
//!
//! A fiber non-degenerate almost Dirac structure on a product chart is the
//! data of a connection, a horizontal 2-form and a vertical bivector. This
//! crate assembles that data, evaluates the Courant-bracket obstruction,
//! builds gauge couplings, and transports fibers around base loops.

pub mod app;
pub mod calculus;
pub mod dirac;
pub mod error;
pub mod expr;
pub mod fibration;
pub mod gauge;
pub mod jet;
pub mod linalg;
pub mod sampling;

pub use calculus::{Chart, TensorField, Variance};
pub use dirac::{DiracTriple, Generator, IntegrabilityReport, SamplePlan, Verdict};
pub use error::{Error, Result};
pub use expr::Expr;
pub use fibration::{ConnectionCoeffs, FibrationChart};
pub use jet::Jet;
