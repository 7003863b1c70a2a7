use confsense_core::estimators::{fit_mediation, ols};
use confsense_core::mediation_sens::mediation_bounds;
use confsense_core::ovb::contour_grid;
use confsense_core::registry::{builtin_registry, recommend, WorkflowAnswers};
use confsense_core::scm::{build_paper_dgp, simulate};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn bench_simulate(c: &mut Criterion) {
    let spec = build_paper_dgp();
    let mut g = c.benchmark_group("simulate");
    for n in [10_000usize, 200_000] {
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| simulate(&spec, n, black_box(1)).unwrap())
        });
    }
    g.finish();
}

fn bench_estimators(c: &mut Criterion) {
    let data = simulate(&build_paper_dgp(), 200_000, 1).unwrap();
    c.bench_function("ols/200k/3 regressors", |b| {
        b.iter(|| ols(black_box(&data), "Y", &["A", "U_AY", "U_IY"]).unwrap())
    });
    let fit = fit_mediation(&data, "A", "M", "Y", &["U_AY", "U_IY"]).unwrap();
    c.bench_function("mediation_bounds/19", |b| {
        b.iter(|| mediation_bounds(black_box(&fit), 0.9, 19).unwrap())
    });
    let o = ols(&data, "Y", &["A"]).unwrap();
    c.bench_function("contour_grid/41", |b| {
        b.iter(|| contour_grid(black_box(&o), "A", 41, 0.8).unwrap())
    });
}

fn bench_recommend(c: &mut Criterion) {
    let reg = builtin_registry();
    let answers = WorkflowAnswers::wildcard();
    c.bench_function("recommend/wildcard", |b| {
        b.iter(|| recommend(black_box(&answers), &reg).unwrap())
    });
}

criterion_group!(benches, bench_simulate, bench_estimators, bench_recommend);
criterion_main!(benches);
