use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dagproof_core::bundle::{DagDecl, Unit};
use dagproof_core::dag::{compute_values, critical_path};
use dagproof_core::profile::{extract_symbols, witness::literal_absent};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_dag(n: usize, seed: u64) -> DagDecl {
    let mut rng = StdRng::seed_from_u64(seed);
    let units = (0..n)
        .map(|i| {
            let deps: Vec<String> = (0..i)
                .filter(|_| rng.random_bool(4.0 / n as f64))
                .map(|d| format!("U{d:04}"))
                .collect();
            let deps: Vec<&str> = deps.iter().map(String::as_str).collect();
            Unit::new(format!("U{i:04}"), &deps, rng.random_range(1..=500))
        })
        .collect();
    DagDecl::from_units(units)
}

fn dag(c: &mut Criterion) {
    let mut group = c.benchmark_group("dag");
    for n in [10, 100, 1000] {
        let d = random_dag(n, n as u64);
        group.bench_with_input(BenchmarkId::new("critical_path", n), &d, |b, d| {
            b.iter(|| critical_path(black_box(d)))
        });
        group.bench_with_input(BenchmarkId::new("compute_values", n), &d, |b, d| {
            b.iter(|| compute_values(black_box(d)))
        });
    }
    group.finish();
}

const GO: &[u8] =
    include_bytes!("../../../fixtures/hello-world/proof-bundle/src/go_convoluted/hello.go");

fn profile(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(7);
    let noise: Vec<u8> = (0..1 << 20)
        .map(|_| rng.random_range(b' '..=b'~'))
        .collect();
    c.bench_function("literal_absent/1MiB", |b| {
        b.iter(|| literal_absent(black_box(&noise), b"Hello, world!"))
    });
    c.bench_function("extract_symbols/go", |b| {
        b.iter(|| extract_symbols("hello.go", black_box(GO), "go"))
    });
}

criterion_group!(benches, dag, profile);
criterion_main!(benches);
