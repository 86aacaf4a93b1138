//! Compares the rayon-fanned batch routines against their sequential twins.
//! Run with `cargo bench` (parallel feature on) — both paths are compiled
//! either way, so the comparison is always available.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crlab::construct::{check_subharmonic, check_subharmonic_seq, gen_sequences, SurfaceModel};
use crlab::obstruct::{certify_batch, certify_batch_seq, random_normalized_curve};

fn bench_subharmonic(c: &mut Criterion) {
    let family = gen_sequences(2, &[3, 6], 8).unwrap();
    let model = SurfaceModel::new(family);
    let mut group = c.benchmark_group("subharmonic_sampling");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| check_subharmonic(&model, 6, 400, 1e-9))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| check_subharmonic_seq(&model, 6, 400, 1e-9))
    });
    group.finish();
}

fn bench_certification(c: &mut Criterion) {
    let family = gen_sequences(2, &[3, 6, 9, 12], 36).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let curves: Vec<_> = (0..24)
        .map(|_| random_normalized_curve(&mut rng, 2, 4, 36))
        .collect();
    let mut group = c.benchmark_group("batch_certification");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| certify_batch(&curves, &family)));
    group.bench_function("sequential", |b| {
        b.iter(|| certify_batch_seq(&curves, &family))
    });
    group.finish();
}

criterion_group!(benches, bench_subharmonic, bench_certification);
criterion_main!(benches);
