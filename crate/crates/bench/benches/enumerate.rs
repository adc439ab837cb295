use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tiltwalk::analysis::zc_bracket_tables;
use tiltwalk::enumerate::{compute_tables, tree_transfer_tables, tree_transfer_walks};
use tiltwalk::sampler::{sample_exact, sample_rosenbluth};
use tiltwalk::{Method, ModelSpec, WeightSpec};

const EF4: ModelSpec = ModelSpec::EndFixedTree { k: 4 };
const PRODUCT: ModelSpec = ModelSpec::ProductTreeZd { k: 3, d: 1 };

fn dfs(c: &mut Criterion) {
    let mut g = c.benchmark_group("dfs");
    g.sample_size(10);
    for (name, model, weight, n) in [
        ("end-fixed-4/saw", EF4, WeightSpec::Saw, 10),
        ("product-3-1/saw", PRODUCT, WeightSpec::Saw, 10),
        (
            "product-3-1/weakly-saw",
            PRODUCT,
            WeightSpec::WeaklySaw { g: 0.5 },
            8,
        ),
    ] {
        g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
            b.iter(|| compute_tables(model, weight, n, Some(Method::Dfs)).unwrap())
        });
    }
    g.finish();
}

fn transfer(c: &mut Criterion) {
    let mut g = c.benchmark_group("transfer");
    g.sample_size(10);
    for n in [100, 500] {
        g.bench_with_input(BenchmarkId::new("walks", n), &n, |b, &n| {
            b.iter(|| tree_transfer_walks(EF4, WeightSpec::Saw, n).unwrap())
        });
    }
    g.bench_function("full-tables/100", |b| {
        b.iter(|| tree_transfer_tables(EF4, WeightSpec::Saw, 100).unwrap())
    });
    g.finish();
}

fn brackets(c: &mut Criterion) {
    let t = tree_transfer_tables(EF4, WeightSpec::Saw, 14).unwrap();
    c.bench_function("bracket/end-fixed-4/n14", |b| {
        b.iter(|| zc_bracket_tables(&t, 0.3, 1e-9))
    });
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample");
    g.sample_size(10);
    g.bench_function("exact/end-fixed-3/n100x1000", |b| {
        b.iter(|| {
            sample_exact(
                ModelSpec::EndFixedTree { k: 3 },
                WeightSpec::Saw,
                0.3,
                100,
                1000,
                1,
            )
            .unwrap()
        })
    });
    g.bench_function("rosenbluth/product-3-1/n50x1000", |b| {
        b.iter(|| sample_rosenbluth(PRODUCT, WeightSpec::Saw, 0.0, 50, 1000, 1).unwrap())
    });
    g.finish();
}

criterion_group!(benches, dfs, transfer, brackets, sampling);
criterion_main!(benches);
