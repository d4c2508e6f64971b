use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use std::time::Duration;
use ucgl_core::groupoid::random_params;
use ucgl_core::symplectic::gram_matrix;
use ucgl_core::{roots, SteinbergSection};

fn section(n: usize) -> SteinbergSection {
    roots::section(n, Duration::from_secs(60), &roots::default_cache_dir()).expect("root sets")
}

fn stokes(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_m");
    for n in 1..=4 {
        let sec = section(n);
        let s = random_params(n, &mut ChaCha8Rng::seed_from_u64(1));
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| b.iter(|| sec.build_m(black_box(s)).unwrap()));
    }
    group.finish();
}

fn composition(c: &mut Criterion) {
    let mut group = c.benchmark_group("compose");
    for n in 1..=4 {
        let sec = section(n);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = sec.sample_z(&mut rng).unwrap();
        let q = sec.sample_over(&p.a, &mut rng).unwrap();
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| sec.try_compose(black_box(&p), black_box(&q)).unwrap()));
    }
    group.finish();
}

fn two_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("tangent_gram");
    for n in 1..=4 {
        let sec = section(n);
        let p = sec.sample_z(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| {
                let basis = sec.tangent_space(black_box(&p), 1e-10).unwrap();
                gram_matrix(&p, &basis).unwrap().min_singular
            })
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("derive_root_sets");
    group.sample_size(10);
    for n in 1..=3 {
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| roots::derive_root_sets(n, Duration::from_secs(60)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, stokes, composition, two_form, search);
criterion_main!(benches);
