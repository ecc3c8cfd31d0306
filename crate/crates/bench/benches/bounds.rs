use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dlrisk_core::bounds::{best_var_constrained, prob_upper, worst_rvar_constrained, worst_var_constrained};
use dlrisk_core::coupling::dl_plan_truncated;
use dlrisk_core::{BoundOptions, Dist, OrderedPair};
use std::hint::black_box;

fn pareto_pair() -> OrderedPair {
    OrderedPair::new(Dist::pareto(1.0, 1.0).unwrap(), Dist::pareto(2.0, 1.0).unwrap()).unwrap()
}

fn plan(c: &mut Criterion) {
    let pair = pareto_pair();
    let mut group = c.benchmark_group("dl_plan");
    for n in [1_000, 10_000, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| dl_plan_truncated(pair.f(), pair.g(), n, black_box(0.9), 0.999).unwrap())
        });
    }
    group.finish();
}

fn transport(c: &mut Criterion) {
    let pair = pareto_pair();
    // Warm the scan grid so the loop measures queries only.
    pair.transport_upper(2.0);
    c.bench_function("transport_upper", |b| b.iter(|| pair.transport_upper(black_box(3.7))));
    c.bench_function("transport_lower", |b| b.iter(|| pair.transport_lower(black_box(3.7))));
}

fn bounds(c: &mut Criterion) {
    let opts = BoundOptions::default();
    let pareto = pareto_pair();
    let uniform = OrderedPair::new(Dist::uniform(0.0, 1.0).unwrap(), Dist::uniform(0.0, 1.5).unwrap()).unwrap();
    let atoms: Vec<f64> = (0..2000).map(|i| ((i * 7919) % 2000) as f64 / 100.0).collect();
    let shifted: Vec<f64> = atoms.iter().map(|x| x + 0.5).collect();
    let empirical =
        OrderedPair::new(Dist::empirical(&atoms, None).unwrap(), Dist::empirical(&shifted, None).unwrap()).unwrap();

    c.bench_function("worst_var/pareto", |b| {
        b.iter(|| worst_var_constrained(&pareto, black_box(0.95), &opts).unwrap())
    });
    c.bench_function("best_var/pareto", |b| b.iter(|| best_var_constrained(&pareto, black_box(0.95), &opts).unwrap()));
    c.bench_function("worst_var/empirical", |b| {
        b.iter(|| worst_var_constrained(&empirical, black_box(0.95), &opts).unwrap())
    });
    c.bench_function("worst_rvar/uniform", |b| {
        b.iter(|| worst_rvar_constrained(&uniform, black_box(0.5), 0.9, &opts).unwrap())
    });
    let mut slow = c.benchmark_group("slow");
    slow.sample_size(10);
    slow.bench_function("prob_upper/pareto", |b| b.iter(|| prob_upper(&pareto, black_box(8.0), &opts).unwrap()));
    slow.finish();
}

criterion_group!(benches, plan, transport, bounds);
criterion_main!(benches);
