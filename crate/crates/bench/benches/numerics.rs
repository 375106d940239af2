use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qre_core::bounds::sandwich;
use qre_core::conjecture::{conjecture_ratio, modular_weight_matrix};
use qre_core::divergence::{quasi_entropy_spectral, SuperoperatorSpectrum};
use qre_core::linalg::eigh;
use qre_core::omd::{eval_via_representation, OmdFunction};
use qre_core::rng::rng_from_seed;
use qre_core::states::{random_pair, StatePair};

fn pair(d: usize) -> StatePair {
    random_pair(d, &mut rng_from_seed(d as u64)).unwrap()
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for d in [2, 4, 8, 16] {
        let m = pair(d).rho.matrix().clone();
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| {
            b.iter(|| eigh(black_box(m)))
        });
    }
    group.finish();
}

fn divergences(c: &mut Criterion) {
    let f = OmdFunction::tsallis(1.5).unwrap();
    let mut group = c.benchmark_group("divergence");
    for d in [2, 4, 6] {
        let p = pair(d);
        group.bench_with_input(BenchmarkId::new("spectral", d), &p, |b, p| {
            b.iter(|| quasi_entropy_spectral(black_box(p), &f))
        });
        group.bench_with_input(BenchmarkId::new("superoperator", d), &p, |b, p| {
            b.iter(|| {
                SuperoperatorSpectrum::new(black_box(p))
                    .unwrap()
                    .expectation(&f)
            })
        });
        group.bench_with_input(BenchmarkId::new("sandwich", d), &p, |b, p| {
            b.iter(|| sandwich(black_box(p), &f))
        });
    }
    group.finish();
}

fn representation(c: &mut Criterion) {
    let f = OmdFunction::neg_power(0.5).unwrap();
    c.bench_function("representation neg-power x=3", |b| {
        b.iter(|| eval_via_representation(&f, black_box(3.0)))
    });
}

fn conjecture(c: &mut Criterion) {
    let p = pair(5);
    let w = modular_weight_matrix(&p, 1.0).unwrap();
    c.bench_function("conjecture ratio d=5", |b| {
        b.iter(|| conjecture_ratio(black_box(&w), &p))
    });
}

criterion_group!(
    benches,
    eigensolver,
    divergences,
    representation,
    conjecture
);
criterion_main!(benches);
