//! Frozen catalog expectations, reproduced by the report and by a
//! brute-force pass over the Courant bracket.

use fibdirac_core::app::{catalog_get, catalog_list, run_check, ModelKind, RunConfig};
use fibdirac_core::dirac::{t_direct_table, Generator, Verdict};
use fibdirac_core::sampling::sample_points;

#[test]
fn every_entry_reproduces_its_expectation() {
    let cfg = RunConfig::default();
    for e in catalog_list() {
        let r = run_check(&e.load().unwrap(), &cfg).unwrap();
        assert!(r.ok, "{}: {}", e.id, r.to_text());
    }
}

#[test]
fn catalog_has_the_required_entries() {
    let ids: Vec<&str> = catalog_list().iter().map(|e| e.id).collect();
    for want in [
        "trivial_product",
        "r3_counterexample",
        "presymplectic_block",
        "hopf_s2",
        "hopf_su2star",
        "perturbed_nonpoisson",
        "broken_curvature_identity",
    ] {
        assert!(ids.contains(&want), "{want}");
    }
    assert!(ids.len() >= 7);
}

/// Condition key of a generator triple, by its number of horizontal slots.
fn condition_of(gens: [Generator; 3]) -> &'static str {
    match gens.iter().filter(|g| matches!(g, Generator::Horizontal(_))).count() {
        0 => "i",
        1 => "ii",
        2 => "iv",
        _ => "iii",
    }
}

#[test]
fn brute_force_bracket_agrees_with_frozen_conditions() {
    for e in catalog_list() {
        let doc = e.document().unwrap();
        let expect = doc.expectation().unwrap().clone();
        let model = e.load().unwrap();
        if expect.verdict == Verdict::FiberDegenerate {
            assert!(matches!(model.kind, ModelKind::Graph(_)));
            continue;
        }
        let t = model.triple().unwrap();
        let gens = t.generators();
        let n = gens.len();
        let mut worst = std::collections::BTreeMap::<&str, f64>::new();
        for p in sample_points(t.chart().total(), 40, 11) {
            let table = t_direct_table(&t, &p).unwrap();
            for (a, &g1) in gens.iter().enumerate() {
                for (b, &g2) in gens.iter().enumerate() {
                    for (c, &g3) in gens.iter().enumerate() {
                        let v = table[(a * n + b) * n + c].abs();
                        let w = worst.entry(condition_of([g1, g2, g3])).or_insert(0.0);
                        *w = w.max(v);
                    }
                }
            }
        }
        for (key, pass) in &expect.conditions {
            let w = worst.get(key.as_str()).copied().unwrap_or(0.0);
            assert_eq!(w < 1e-6, *pass, "{} condition {key}: {w:e}", e.id);
        }
    }
}

#[test]
fn hopf_s2_coupling_is_a_presymplectic_graph() {
    use fibdirac_core::dirac::{assemble, classify_subspace};
    let t = catalog_get("hopf_s2").unwrap().load().unwrap().triple().unwrap();
    for p in sample_points(t.chart().total(), 20, 2) {
        assert!(classify_subspace(&assemble(&t, &p).unwrap()).presymplectic);
    }
}
