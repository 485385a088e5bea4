use criterion::{criterion_group, criterion_main, Criterion};

use ppdl_core::distributions::{tv_distance, tv_exact_gaussian_1d};
use ppdl_core::{Distribution, GaussianParams, RngSeed};

fn tv(c: &mut Criterion) {
    let p = GaussianParams::univariate(0.0, 1.0).unwrap();
    let q = GaussianParams::univariate(0.7, 2.5).unwrap();
    c.bench_function("tv_exact_1d", |b| {
        b.iter(|| tv_exact_gaussian_1d(&p, &q).unwrap())
    });

    let p2: Distribution =
        GaussianParams::new(vec![0.0, 0.0], vec![vec![1.0, 0.3], vec![0.3, 1.0]])
            .unwrap()
            .into();
    let q2: Distribution =
        GaussianParams::new(vec![0.5, -0.2], vec![vec![1.5, 0.0], vec![0.0, 0.8]])
            .unwrap()
            .into();
    c.bench_function("tv_monte_carlo_2d_10k", |b| {
        b.iter(|| tv_distance(&p2, &q2, 10_000, RngSeed(3)).unwrap())
    });
}

criterion_group!(benches, tv);
criterion_main!(benches);
