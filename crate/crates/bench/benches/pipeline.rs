use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qkalman_bench::{dense, example, planted};
use qkalman_core::gramians::{gramian_pair, Horizon};
use qkalman_core::model::build_quadrature;
use qkalman_core::pipeline::{decompose, DecomposeOptions};
use qkalman_core::subspaces::{extract_subspaces, svd_split};
use qkalman_core::ToleranceConfig;
use std::hint::black_box;

fn example_pipeline(c: &mut Criterion) {
    let model = example();
    let options = DecomposeOptions::default();
    c.bench_function("decompose/gzpg17", |b| {
        b.iter(|| decompose(black_box(&model), &options).unwrap())
    });
}

fn stages(c: &mut Criterion) {
    let mut group = c.benchmark_group("stages");
    let cfg = ToleranceConfig::default();
    for n in [2usize, 4, 8] {
        let model = planted(n, 2, 11);
        let sys = build_quadrature(&model);
        group.bench_with_input(BenchmarkId::new("gramians", n), &n, |b, _| {
            b.iter(|| gramian_pair(black_box(&sys), &model, Horizon::default()).unwrap())
        });
        let pair = gramian_pair(&sys, &model, Horizon::default()).unwrap();
        group.bench_with_input(BenchmarkId::new("subspaces", n), &n, |b, _| {
            b.iter(|| {
                let svd = svd_split(black_box(&pair.wo), &cfg).unwrap();
                extract_subspaces(&svd, &cfg).unwrap()
            })
        });
    }
    group.finish();
}

fn scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    let options = DecomposeOptions::default();
    for n in [2usize, 4, 8, 16] {
        let model = planted(n, 2, 3);
        group.bench_with_input(BenchmarkId::new("planted", n), &model, |b, m| {
            b.iter(|| decompose(black_box(m), &options).unwrap())
        });
        if n <= 8 {
            let model = dense(n, 2, 3);
            group.bench_with_input(BenchmarkId::new("dense", n), &model, |b, m| {
                b.iter(|| decompose(black_box(m), &options).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, example_pipeline, stages, scaling);
criterion_main!(benches);
