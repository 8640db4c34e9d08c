use super::model::{Document, Model};
use crate::error::{Error, Result};

/// A built-in model with its frozen expectation.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub id: &'static str,
    source: &'static str,
}

macro_rules! entry {
    ($id:literal) => {
        CatalogEntry {
            id: $id,
            source: include_str!(concat!("../../catalog/", $id, ".json")),
        }
    };
}

const ENTRIES: &[CatalogEntry] = &[
    entry!("trivial_product"),
    entry!("r3_counterexample"),
    entry!("presymplectic_block"),
    entry!("hopf_s2"),
    entry!("hopf_su2star"),
    entry!("perturbed_nonpoisson"),
    entry!("broken_curvature_identity"),
    entry!("nonpoisson_fiber"),
    entry!("nonclosed_horizontal_form"),
    entry!("blended_flat"),
];

impl CatalogEntry {
    /// The entry's JSON source, usable as a model file.
    pub fn source(&self) -> &'static str {
        self.source
    }

    pub fn document(&self) -> Result<Document> {
        Document::parse(self.source)
    }

    pub fn description(&self) -> String {
        self.document()
            .ok()
            .and_then(|d| d.description().map(str::to_string))
            .unwrap_or_default()
    }

    pub fn load(&self) -> Result<Model> {
        self.document()?.build(self.id)
    }
}

pub fn catalog_list() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn catalog_get(id: &str) -> Result<&'static CatalogEntry> {
    ENTRIES
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownModel(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_parse_and_carry_matching_ids() {
        for e in catalog_list() {
            let d = e.document().unwrap();
            assert_eq!(d.id(), Some(e.id));
            assert!(d.expectation().is_some(), "{}", e.id);
            assert!(!e.description().is_empty());
        }
        assert!(catalog_get("nope").is_err());
    }
}
