use std::hint::black_box;

use cogrowth::growth::shell_census;
use cogrowth::word::for_each_reduced_word;
use cogrowth::{Group, NormalSubgroupOracle};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn reduced_words(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduced_words");
    for len in [8usize, 10, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, &len| {
            b.iter(|| {
                let mut n = 0u64;
                for_each_reduced_word(2, len, |w| n += w.len() as u64);
                black_box(n)
            })
        });
    }
    group.finish();
}

fn census(c: &mut Criterion) {
    let f2 = Group::parse("kind=free\nrank=2\n").unwrap();
    let f2xf2 = Group::parse("kind=direct_product_of_free\nranks=2,2\n").unwrap();
    let commutator = NormalSubgroupOracle::parse("quotient=commutator\n", &f2).unwrap();
    let parity = NormalSubgroupOracle::parse("quotient=finite_permutation\nimages=a:(1 2),b:(1 2)\n", &f2).unwrap();

    let mut group = c.benchmark_group("shell_census");
    group.sample_size(20);
    group.bench_function("f2_r10", |b| b.iter(|| shell_census(&f2, black_box(10), 1, None).unwrap()));
    group.bench_function("f2xf2_r6", |b| b.iter(|| shell_census(&f2xf2, black_box(6), 1, None).unwrap()));
    group.bench_function("f2_commutator_r10", |b| {
        b.iter(|| shell_census(&f2, black_box(10), 1, Some(&commutator)).unwrap())
    });
    group.bench_function("f2_parity_r10", |b| {
        b.iter(|| shell_census(&f2, black_box(10), 1, Some(&parity)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, reduced_words, census);
criterion_main!(benches);
