use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ppdl_core::yatracos::smalldb;
use ppdl_core::{PrivacyBudget, RngSeed};

fn smalldb_by_size(c: &mut Criterion) {
    // domain of 8 with every non-trivial query mask
    let hist = [40, 12, 3, 0, 25, 9, 7, 4];
    let masks: Vec<u64> = (1..255u64).collect();
    let budget = PrivacyBudget::new(1.0).unwrap();
    let mut group = c.benchmark_group("smalldb");
    for k in [4, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| smalldb(&hist, &masks, budget, k, RngSeed(4)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, smalldb_by_size);
criterion_main!(benches);
