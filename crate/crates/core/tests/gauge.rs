use std::sync::Arc;

use fibdirac_core::app::{catalog_get, Document, GaugeData};
use fibdirac_core::calculus::{Chart, ExprSource};
use fibdirac_core::dirac::{integrability_report, DiracTriple, SamplePlan, Verdict};
use fibdirac_core::expr::Expr;
use fibdirac_core::gauge::{
    build_coupling, fatness_classify, moment_relation_check, Fatness, HamiltonianAction,
    LieAlgebraData, PrincipalConnectionChart,
};
use fibdirac_core::sampling::sample_points;

fn gauge(id: &str) -> GaugeData {
    match catalog_get(id).unwrap().document().unwrap() {
        Document::Gauge(g) => g.build().unwrap(),
        Document::Model(_) => panic!("{id} is not a gauge entry"),
    }
}

fn coupling(d: &GaugeData) -> DiracTriple {
    build_coupling(&d.connection, &d.algebra, &d.action).unwrap()
}

#[test]
fn hopf_couplings_are_dirac_on_500_points() {
    let plan = SamplePlan { samples: 500, seed: 0 };
    for id in ["hopf_su2star", "hopf_s2"] {
        let r = integrability_report(&coupling(&gauge(id)), &plan, 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::Dirac, "{id}: {:?}", r.failing());
    }
}

#[test]
fn fatness_follows_the_zero_set_of_the_moment_map() {
    let t = coupling(&gauge("hopf_su2star"));
    let mut fat = 0;
    for mut p in sample_points(t.chart().total(), 200, 3) {
        if p[4].abs() > 0.1 {
            assert_eq!(fatness_classify(&t, &p).unwrap(), Fatness::Poisson, "{p:?}");
            fat += 1;
        }
        p[4] = 0.0;
        assert_eq!(fatness_classify(&t, &p).unwrap(), Fatness::DiracOnly);
    }
    assert!(fat > 100);
}

#[test]
fn moment_relation_detects_a_perturbed_omega() {
    let d = gauge("hopf_su2star");
    let t = coupling(&d);
    let plan = SamplePlan { samples: 100, seed: 1 };
    let clean = moment_relation_check(&t, &d.connection, &d.algebra, &d.action, &plan).unwrap();
    assert!(clean < 1e-12);

    let omega = t.omega().exprs().unwrap()[0].clone();
    let u = Expr::var(0);
    let bumped = Expr::add(omega, Expr::mul(Expr::num(1e-3), u));
    let broken = DiracTriple::new(t.gamma().clone(), Arc::new(ExprSource(vec![bumped])), t.pi().clone()).unwrap();
    let r = moment_relation_check(&broken, &d.connection, &d.algebra, &d.action, &plan).unwrap();
    assert!(r > 5e-4 && r <= 1e-3 + 1e-12, "{r}");
}

#[test]
fn shifting_the_moment_map_leaves_the_curvature_identity_unchanged() {
    let d = gauge("hopf_su2star");
    let shifted = HamiltonianAction::new(
        d.action.fiber().clone(),
        d.action.pi().to_vec(),
        d.action.generators().to_vec(),
        vec![Expr::add(d.action.moments()[0].clone(), Expr::num(0.37))],
    )
    .unwrap();
    let plan = SamplePlan { samples: 200, seed: 2 };
    let a = integrability_report(&coupling(&d), &plan, 1e-6).unwrap();
    let b = integrability_report(&build_coupling(&d.connection, &d.algebra, &shifted).unwrap(), &plan, 1e-6)
        .unwrap();
    assert_eq!(b.verdict, Verdict::Dirac);
    let (ra, rb) = (a.conditions["iv"].max, b.conditions["iv"].max);
    assert!((ra - rb).abs() < 1e-12, "{ra} vs {rb}");
}

#[test]
fn zero_connection_couples_to_the_product() {
    let base = Chart::from_box(&[("u", -1.0, 1.0), ("v", -1.0, 1.0)]).unwrap();
    let p = PrincipalConnectionChart::parse(base, &[&["0", "0"]]).unwrap();
    let d = gauge("hopf_su2star");
    let g = LieAlgebraData::abelian(1).unwrap();
    let t = build_coupling(&p, &g, &d.action).unwrap();
    for pt in sample_points(t.chart().total(), 50, 4) {
        assert!(t.gamma().values(&pt).unwrap().iter().flatten().all(|v| *v == 0.0));
        assert_eq!(t.omega().eval(&pt, 0).unwrap()[0].value(), 0.0);
        assert_eq!(fatness_classify(&t, &pt).unwrap(), Fatness::DiracOnly);
    }
    let r = integrability_report(&t, &SamplePlan::default(), 1e-6).unwrap();
    assert_eq!(r.verdict, Verdict::Dirac);
}
