use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use trisquare::nonunit::sieve_nonunit_exceptions;
use trisquare::polygonal::k_sum_exceptions;
use trisquare::ternary::{form_f, genus_exception_sieve, theta_coeffs, FormId};
use trisquare::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn nonunit(c: &mut Criterion) {
    let mut g = c.benchmark_group("nonunit_sieve");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 1_000_000), &exec, |b, &exec| {
            b.iter(|| sieve_nonunit_exceptions(1, black_box(1_000_000), None, exec).unwrap())
        });
    }
    g.finish();
}

fn genus(c: &mut Criterion) {
    let mut g = c.benchmark_group("genus_sieve_f");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 1_000_000), &exec, |b, &exec| {
            b.iter(|| genus_exception_sieve(FormId::F, black_box(1_000_000), exec).unwrap())
        });
    }
    g.finish();
}

fn theta(c: &mut Criterion) {
    let f = form_f();
    let mut g = c.benchmark_group("theta_f");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 1_000_000), &exec, |b, &exec| {
            b.iter(|| theta_coeffs(&f, black_box(1_000_000), exec).unwrap())
        });
    }
    g.finish();
}

fn octagonal(c: &mut Criterion) {
    let mut g = c.benchmark_group("octagonal_k4");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 100_000), &exec, |b, &exec| {
            b.iter(|| k_sum_exceptions(8, 4, black_box(100_000), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, nonunit, genus, theta, octagonal);
criterion_main!(benches);
