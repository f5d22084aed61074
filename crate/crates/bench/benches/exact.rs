use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gmcantor::ExactScalar;

fn arithmetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    for e in [666u64, 20_000, 3_453_192] {
        let tiny = ExactScalar::pow2_neg(e).div_int(6);
        let unit = ExactScalar::ratio(7, 9);
        let mixed = &unit + &tiny;
        group.bench_with_input(BenchmarkId::new("add_far_scales", e), &e, |b, _| {
            b.iter(|| black_box(&unit) + black_box(&tiny))
        });
        group.bench_with_input(BenchmarkId::new("compare", e), &e, |b, _| {
            b.iter(|| black_box(&mixed) > black_box(&unit))
        });
        group.bench_with_input(BenchmarkId::new("round_down_64", e), &e, |b, _| {
            b.iter(|| black_box(&mixed).round_down(64))
        });
    }
    group.finish();
}

criterion_group!(benches, arithmetic);
criterion_main!(benches);
