//! Connections, curvature, transport and blending.

use fibdirac_core::app::catalog_get;
use fibdirac_core::dirac::{integrability_report, DiracTriple, SamplePlan};
use fibdirac_core::fibration::{
    blend_triples, convergence_ratio, holonomy_poisson_residual, transport_point, BaseVectorField,
    ConnectionCoeffs, FibrationChart, HolonomyProbe, LoopPath, PartitionOfUnity,
};
use fibdirac_core::error::Error;
use fibdirac_core::sampling::sample_points;

fn su2_chart() -> FibrationChart {
    FibrationChart::from_boxes(
        &[("u", -1.0, 1.0), ("v", -1.0, 1.0)],
        &[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0)],
    )
    .unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn curvature_is_tensorial_and_vertical() {
    let c = su2_chart();
    let g = ConnectionCoeffs::parse(&c, &[&["v*y", "u*z", "x*x"], &["sin(u)*z", "0", "y*v"]]).unwrap();
    let x = BaseVectorField::parse(&c, &["u", "1"]).unwrap();
    let fx = BaseVectorField::parse(&c, &["(u^2 + 1)*u", "(u^2 + 1)"]).unwrap();
    let y = BaseVectorField::parse(&c, &["v*u", "cos(v)"]).unwrap();
    let k = g.curvature(&x, &y).unwrap();
    let kf = g.curvature(&fx, &y).unwrap();
    for p in sample_points(c.total(), 50, 1) {
        let f = p[0] * p[0] + 1.0;
        let (a, b) = (k.values(&p).unwrap(), kf.values(&p).unwrap());
        let scaled: Vec<f64> = a.iter().map(|v| f * v).collect();
        assert!(max_diff(&scaled, &b) < 1e-12);
        assert!(a[..2].iter().all(|v| v.abs() < 1e-12), "not vertical: {a:?}");
    }
}

#[test]
fn lift_is_linear_over_base_functions() {
    let c = su2_chart();
    let g = ConnectionCoeffs::parse(&c, &[&["v*y", "u*z", "x"], &["z", "0", "y*v"]]).unwrap();
    let x = BaseVectorField::parse(&c, &["u", "v"]).unwrap();
    let fx = BaseVectorField::parse(&c, &["exp(v)*u", "exp(v)*v"]).unwrap();
    let (l, lf) = (g.horizontal_lift(&x).unwrap(), g.horizontal_lift(&fx).unwrap());
    for p in sample_points(c.total(), 20, 2) {
        let scaled: Vec<f64> = l.values(&p).unwrap().iter().map(|v| p[1].exp() * v).collect();
        assert!(max_diff(&scaled, &lf.values(&p).unwrap()) < 1e-12);
    }
}

#[test]
fn flat_connections_have_trivial_holonomy() {
    for id in ["trivial_product", "blended_flat"] {
        let t = catalog_get(id).unwrap().load().unwrap().triple().unwrap();
        let path = LoopPath::circle(&[0.1, -0.2], 0.3, (0, 1)).unwrap();
        for y in [[0.1, 0.2, -0.3], [0.4, -0.1, 0.0]] {
            let end = transport_point(t.gamma(), &path, &y, 1e-3).unwrap();
            assert!(max_diff(&end, &y) < 1e-10, "{id}: {end:?}");
        }
    }
}

#[test]
fn small_loop_holonomy_scales_with_area() {
    let t = catalog_get("hopf_su2star").unwrap().load().unwrap().triple().unwrap();
    let y = [0.5, 0.2, 0.1];
    let disp = |r: f64| {
        let path = LoopPath::circle(&[0.2, 0.1], r, (0, 1)).unwrap();
        max_diff(&transport_point(t.gamma(), &path, &y, 1e-3).unwrap(), &y)
    };
    let ratio = disp(0.1) / disp(0.05);
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}

#[test]
fn poisson_connections_preserve_pi_along_loops() {
    let t = catalog_get("hopf_su2star").unwrap().load().unwrap().triple().unwrap();
    let path = LoopPath::circle(&[0.2, 0.1], 0.1, (0, 1)).unwrap();
    let probe = HolonomyProbe::new(path.clone(), vec![vec![0.5, 0.2, 0.1], vec![-0.3, 0.4, 0.2]]);
    let r = holonomy_poisson_residual(&probe, t.gamma(), t.pi().as_ref()).unwrap();
    assert!(r.max < 1e-5 && r.max_displacement > 1e-3, "{r:?}");

    let bad = catalog_get("perturbed_nonpoisson").unwrap().load().unwrap().triple().unwrap();
    let r = holonomy_poisson_residual(&probe, bad.gamma(), bad.pi().as_ref()).unwrap();
    assert!(r.max > 1e-4, "{r:?}");
}

#[test]
fn rk4_converges_at_fourth_order() {
    let t = catalog_get("hopf_su2star").unwrap().load().unwrap().triple().unwrap();
    // at fine steps the differences are rounding noise, so start coarse
    let path = LoopPath::circle(&[0.0, 0.0], 0.1, (0, 1)).unwrap();
    let ratio = convergence_ratio(t.gamma(), &path, &[0.5, 0.2, 0.1], 1.0 / 8.0).unwrap();
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn blends_of_poisson_connections_are_poisson() {
    let c = su2_chart();
    let a = DiracTriple::parse(&c, &[&["y", "-x", "0"], &["0", "0", "0"]], &["0"], &["z", "-y", "x"]).unwrap();
    let b = DiracTriple::parse(&c, &[&["0", "z", "-y"], &["y", "-x", "0"]], &["0"], &["z", "-y", "x"]).unwrap();
    let pou = PartitionOfUnity::parse(&c, &["(1 + sin(u*v)) / 2", "(1 - sin(u*v)) / 2"]).unwrap();
    let t = blend_triples(&pou, &[a, b]).unwrap();
    let r = integrability_report(&t, &SamplePlan { samples: 50, seed: 4 }, 1e-9).unwrap();
    assert!(r.conditions["ii"].pass, "{:?}", r.conditions["ii"]);

    assert!(matches!(
        PartitionOfUnity::parse(&c, &["0.5", "0.6"]),
        Err(Error::WeightSum { .. })
    ));
}
