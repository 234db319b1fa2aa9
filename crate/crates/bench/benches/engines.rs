use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wishart_bench::{case, label, CASES};
use wishart_core::exact::int;
use wishart_core::montecarlo::{ordered_eigenvalues, sample_channel};
use wishart_core::pep::{exact_pep, ordered_exp_integral};
use wishart_core::wishart::{build_psi, marginal_bound, split_indices};
use wishart_core::Dimensions;

fn symbolic(c: &mut Criterion) {
    let mut g = c.benchmark_group("symbolic");
    for (n, m) in [(3, 3), (4, 4)] {
        let d = Dimensions::new(n, m).unwrap();
        g.bench_function(BenchmarkId::new("psi", format!("{n}x{m}")), |b| b.iter(|| build_psi(black_box(&d))));
    }
    for i in 0..CASES.len() {
        let (d, alpha) = case(i);
        let split = split_indices(&alpha).unwrap();
        g.bench_function(BenchmarkId::new("marginal_bound", label(i)), |b| {
            b.iter(|| marginal_bound(black_box(&d), black_box(&split)).unwrap())
        });
    }
    g.bench_function("ordered_exp_integral/[2,3,1,4]", |b| b.iter(|| ordered_exp_integral(black_box(&[2, 3, 1, 4]))));
    g.finish();
}

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_pep");
    g.sample_size(10);
    let gamma = int(1000);
    for i in 0..CASES.len() {
        let (d, alpha) = case(i);
        g.bench_function(label(i), |b| b.iter(|| exact_pep(black_box(&d), black_box(&alpha), &gamma).unwrap()));
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampling");
    for (n, m) in [(3, 3), (4, 4), (8, 8)] {
        let d = Dimensions::new(n, m).unwrap();
        let mut index = 0u64;
        g.bench_function(BenchmarkId::new("channel_and_eigenvalues", format!("{n}x{m}")), |b| {
            b.iter(|| {
                index += 1;
                ordered_eigenvalues(&sample_channel(&d, 1, index)).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, symbolic, exact, sampling);
criterion_main!(benches);
