use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tqc_core::counting::{BoxCounter, CountMode};
use tqc_core::diophantine::conjecture_rhs_full;
use tqc_core::variance::variance_split;
use tqc_core::{Exec, Modulus};

const STRATEGIES: [(&str, Exec); 2] = [("serial", Exec::Serial), ("parallel", Exec::Parallel)];

fn alpha3_scan(c: &mut Criterion) {
    let modulus = Modulus::new(10007).unwrap();
    let n = (10007f64).powf(0.55).ceil() as u64;
    let counter = BoxCounter::new(&modulus, 2, n, CountMode::CoprimeX3).unwrap();
    let alphas = modulus.units();
    let mut group = c.benchmark_group("alpha3_scan_q10007");
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| counter.counts(black_box(&alphas), exec).unwrap())
        });
    }
    group.finish();
}

fn variance(c: &mut Criterion) {
    let modulus = Modulus::new(1009).unwrap();
    let mut group = c.benchmark_group("variance_split_q1009");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| variance_split(&modulus, 2, black_box(40), exec).unwrap())
        });
    }
    group.finish();
}

fn full_scan(c: &mut Criterion) {
    let modulus = Modulus::new(100_003).unwrap();
    let mut group = c.benchmark_group("conjecture_full_q100003");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| conjecture_rhs_full(&modulus, [1, 3, 7], 0.0, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, alpha3_scan, variance, full_scan);
criterion_main!(benches);
