use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use gmcantor::{
    build_atlas, build_extension, lrs_sample_check, odometer_tower, quotient_exact, sample_pairs, AtlasMode,
};
use gmcantor_bench::odometer_atlas;

fn construction(c: &mut Criterion) {
    let tower = Arc::new(odometer_tower(&[2, 9, 73]).unwrap());
    c.bench_function("atlas/strict_2_9_73_depth2", |b| {
        b.iter(|| build_atlas(tower.clone(), 2, AtlasMode::Strict).unwrap())
    });
}

fn certification(c: &mut Criterion) {
    let at = odometer_atlas(&[2, 9, 73], 2, AtlasMode::Strict);
    let pairs = sample_pairs(&at, 2, 2..=2, 16, 1).unwrap();
    c.bench_function("verify/quotient_level2", |b| {
        b.iter(|| {
            for (x, y) in &pairs {
                black_box(quotient_exact(&at, x, y).unwrap());
            }
        })
    });
    let deep = odometer_atlas(&[2, 9, 2, 2, 2, 2], 5, AtlasMode::Checked);
    c.bench_function("verify/lrs_200_depth5", |b| b.iter(|| lrs_sample_check(&deep, 5, 200, 3).unwrap()));
}

fn extension(c: &mut Criterion) {
    let at = odometer_atlas(&[2, 9, 2, 2, 2, 2], 5, AtlasMode::Checked);
    let mut group = c.benchmark_group("extension");
    group.sample_size(10);
    group.bench_function("one_level_depth5", |b| b.iter(|| build_extension(at.clone(), 1, 10_000).unwrap()));
    group.finish();
}

criterion_group!(benches, construction, certification, extension);
criterion_main!(benches);
