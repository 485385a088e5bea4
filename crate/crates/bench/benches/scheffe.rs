use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ppdl_bench::{normal_candidates, private_sample};
use ppdl_core::selection::Tournament;
use ppdl_core::RngSeed;

fn prepare(c: &mut Criterion) {
    let mut group = c.benchmark_group("tournament_prepare");
    for m in [64, 256] {
        let candidates = normal_candidates(m);
        group.bench_with_input(BenchmarkId::from_parameter(m), &candidates, |b, cands| {
            b.iter(|| Tournament::prepare(cands, 0, RngSeed(1)).unwrap())
        });
    }
    group.finish();
}

fn empirical(c: &mut Criterion) {
    let tournament = Tournament::prepare(&normal_candidates(256), 0, RngSeed(1)).unwrap();
    let mut group = c.benchmark_group("empirical_mass");
    for n in [1_000, 10_000] {
        let private = private_sample(n, RngSeed(2));
        group.bench_with_input(BenchmarkId::from_parameter(n), &private, |b, data| {
            b.iter(|| tournament.empirical_mass(data).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, prepare, empirical);
criterion_main!(benches);
