use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use phantom_core::transfer::{build, iterate_with_backend};
use phantom_core::{Backend, Boundary, ModelParams, VectorPair};

fn iterate(c: &mut Criterion) {
    let mut g = c.benchmark_group("iterate");
    g.sample_size(10);
    for n in [20usize, 40] {
        let obc = build(&ModelParams::qudit(Boundary::Obc, n, 2).unwrap()).unwrap();
        let pair = VectorPair::otoc_obc(n, 2, 1).unwrap();
        g.bench_with_input(BenchmarkId::new("obc_float256", n), &n, |b, &n| {
            b.iter(|| iterate_with_backend(&obc, &pair, 3 * n, true, Backend::float(256).unwrap()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("obc_rational", n), &n, |b, &n| {
            b.iter(|| iterate_with_backend(&obc, &pair, n, true, Backend::Rational).unwrap())
        });
        let pbc = build(&ModelParams::qudit(Boundary::Pbc, n, 2).unwrap()).unwrap();
        let pair = VectorPair::otoc_pbc(n, 2, 1).unwrap();
        g.bench_with_input(BenchmarkId::new("pbc_float256", n), &n, |b, &n| {
            b.iter(|| {
                black_box(iterate_with_backend(&pbc, &pair, 3 * n, true, Backend::float(256).unwrap()).unwrap())
            })
        });
    }
    g.finish();
}

criterion_group!(benches, iterate);
criterion_main!(benches);
