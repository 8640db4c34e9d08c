use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fibdirac_bench::{model, triple};
use fibdirac_core::app::fiber_samples;
use fibdirac_core::dirac::{integrability_report, t_components_table, t_direct_table, SamplePlan};
use fibdirac_core::expr::parse;
use fibdirac_core::fibration::{parallel_transport, HolonomyProbe, LoopPath};

fn jets(c: &mut Criterion) {
    let names: Vec<String> = ["u", "v", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let e = parse("-(1 + u^2 + v^2)^2 / 4 * sin(x*y) + exp(z) * atan2(u, 2 + v)", &names).unwrap();
    let p = [0.1, -0.2, 0.3, 0.4, -0.5];
    let mut g = c.benchmark_group("jet_eval");
    for order in 0..=2u8 {
        g.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, &o| {
            b.iter(|| e.eval_jet(black_box(&p), o).unwrap())
        });
    }
    g.finish();
}

fn bracket_tables(c: &mut Criterion) {
    let t = triple("hopf_su2star");
    let p = [0.1, -0.2, 0.3, 0.4, -0.5];
    c.bench_function("t_direct_table", |b| b.iter(|| t_direct_table(&t, black_box(&p)).unwrap()));
    c.bench_function("t_components_table", |b| {
        b.iter(|| t_components_table(&t, black_box(&p)).unwrap())
    });
}

fn reports(c: &mut Criterion) {
    let mut g = c.benchmark_group("integrability_report");
    g.sample_size(10);
    for id in ["trivial_product", "hopf_su2star", "blended_flat"] {
        let t = triple(id);
        let plan = SamplePlan { samples: 200, seed: 0 };
        g.bench_function(id, |b| b.iter(|| integrability_report(&t, &plan, 1e-6).unwrap()));
    }
    g.finish();
}

fn transport(c: &mut Criterion) {
    let m = model("hopf_su2star");
    let t = m.triple().unwrap();
    let mut g = c.benchmark_group("transport");
    g.sample_size(10);
    for step in [1e-2, 1e-3] {
        let probe = HolonomyProbe::new(LoopPath::circle(&[0.0, 0.0], 0.1, (0, 1)).unwrap(), fiber_samples(&m, 8, 0))
            .with_step(step);
        g.bench_with_input(BenchmarkId::from_parameter(step), &probe, |b, probe| {
            b.iter(|| parallel_transport(probe, t.gamma()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, jets, bracket_tables, reports, transport);
criterion_main!(benches);
