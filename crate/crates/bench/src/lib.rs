//! Fixtures shared by the benchmarks in `benches/`.

use fibdirac_core::app::{load_model, Model};
use fibdirac_core::dirac::DiracTriple;

pub fn model(id: &str) -> Model {
    load_model(id).expect("catalog entry")
}

pub fn triple(id: &str) -> DiracTriple {
    model(id).triple().expect("fiber non-degenerate entry")
}
