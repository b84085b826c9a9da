use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heun_core::coincidence::{eval_f, eval_g, eval_k, eval_k_derivative};
use heun_core::hypergeom::{clausen_3f2_unit, eval_hl_hypergeometric};
use heun_core::series::{eval_confluent_heun, eval_heun_local};
use heun_core::verify::{check_relation, sweep_identities};
use heun_core::{
    Clausen3F2Params, ConfluentHeunParams, FMethod, GMethod, GeneralHeunParams, RelationId, SeriesOptions,
};

fn series(c: &mut Criterion) {
    let opts = SeriesOptions::default();
    let mut group = c.benchmark_group("series");
    let p = GeneralHeunParams::new(0.5, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
    for x in [0.1, 0.3, 0.45] {
        group.bench_with_input(BenchmarkId::new("heun_local", x), &x, |b, &x| {
            b.iter(|| eval_heun_local(&p, black_box(x), &opts))
        });
    }
    let k = ConfluentHeunParams::new(5.0, 1.0, 0.0, 0.5, 10.0).unwrap();
    group.bench_function("confluent_k5_x0.9", |b| {
        b.iter(|| eval_confluent_heun(&k, black_box(0.9), &opts))
    });
    group.bench_function("hl_hypergeometric_q1", |b| {
        b.iter(|| eval_hl_hypergeometric(1.0, black_box(0.3), &opts))
    });
    let unit = Clausen3F2Params::new(0.5, 1.0, 1.0, 1.5, 2.0).unwrap();
    group.bench_function("clausen_3f2_unit", |b| b.iter(|| clausen_3f2_unit(black_box(&unit), &opts)));
    group.finish();
}

fn coincidence(c: &mut Criterion) {
    let opts = SeriesOptions::default();
    let mut group = c.benchmark_group("coincidence");
    for m in FMethod::ALL {
        group.bench_with_input(BenchmarkId::new("F20", m.name()), &m, |b, &m| {
            b.iter(|| eval_f(20, black_box(0.3), m))
        });
    }
    for m in GMethod::ALL {
        group.bench_with_input(BenchmarkId::new("G15", m.name()), &m, |b, &m| {
            b.iter(|| eval_g(15, black_box(2.0), m, &opts))
        });
    }
    group.bench_function("K10", |b| b.iter(|| eval_k(10, black_box(0.7), &opts)));
    group.bench_function("K10_deriv3", |b| b.iter(|| eval_k_derivative(10, 3, black_box(0.7))));
    group.finish();
}

fn verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("identities_n50", |b| b.iter(|| sweep_identities(black_box(50), None)));
    group.bench_function("rel_1_9_x100", |b| {
        b.iter(|| check_relation(RelationId::Rel1_9, 100, 1e-7, black_box(0)))
    });
    group.finish();
}

criterion_group!(benches, series, coincidence, verify);
criterion_main!(benches);
