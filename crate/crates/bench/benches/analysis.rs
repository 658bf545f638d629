use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use spreadscope_bench::{blob_embeddings, random_walk, var2_series};
use spreadscope_core::causality::{fevd, fit_var, granger_all_pairs, irf, select_lag};
use spreadscope_core::timeseries::{adf_test_with, AdfRegression};
use spreadscope_core::topics::{kmeans, KmeansOptions};

fn var(c: &mut Criterion) {
    let mut g = c.benchmark_group("var");
    for t in [90, 1000] {
        let series = var2_series(t, 1);
        g.bench_with_input(BenchmarkId::new("select_lag", t), &series, |b, s| {
            b.iter(|| select_lag(black_box(s), 7).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("fit_var", t), &series, |b, s| {
            b.iter(|| fit_var(black_box(s), 2).unwrap())
        });
        let model = fit_var(&series, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("granger", t), &series, |b, s| {
            b.iter(|| granger_all_pairs(black_box(s), 2).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("fevd", t), &model, |b, m| {
            b.iter(|| fevd(black_box(m), 14).unwrap())
        });
    }
    g.finish();

    let model = fit_var(&var2_series(90, 2), 2).unwrap();
    let mut g = c.benchmark_group("irf_bootstrap");
    g.sample_size(10);
    for draws in [100, 1000] {
        g.bench_with_input(BenchmarkId::from_parameter(draws), &draws, |b, &n| {
            b.iter(|| irf(black_box(&model), 14, n, 7).unwrap())
        });
    }
    g.finish();
}

fn adf(c: &mut Criterion) {
    let mut g = c.benchmark_group("adf");
    for t in [90, 5000] {
        let y = random_walk(t, 3);
        g.bench_with_input(BenchmarkId::from_parameter(t), &y, |b, y| {
            b.iter(|| adf_test_with(black_box(y), 7, AdfRegression::Constant).unwrap())
        });
    }
    g.finish();
}

fn clustering(c: &mut Criterion) {
    let mut g = c.benchmark_group("kmeans");
    g.sample_size(10);
    for n in [500, 5000] {
        let emb = blob_embeddings(n, 384, 6, 4);
        let opts = KmeansOptions {
            k: 6,
            ..KmeansOptions::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(n), &emb, |b, e| {
            b.iter(|| kmeans(black_box(e), &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, var, adf, clustering);
criterion_main!(benches);
