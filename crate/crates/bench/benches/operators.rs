use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qgz3_bench::{generic_labels, root_cases};
use qgz3_core::rootlimit::DEFAULT_EPS;
use qgz3_core::{
    compare_with_oracle, enumerate_basis, verify_root, Basis, GeneratorSet, QParam, RegularizedRep,
};

fn enumerate(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    for lab in generic_labels() {
        g.bench_with_input(BenchmarkId::from_parameter(lab), &lab, |b, lab| {
            b.iter(|| enumerate_basis(black_box(lab)))
        });
    }
    g.finish();
}

fn generic_build(c: &mut Criterion) {
    let q = QParam::default_generic().point();
    let mut g = c.benchmark_group("generic_build");
    for lab in generic_labels() {
        let basis = Basis::unprimed(&lab);
        g.bench_with_input(BenchmarkId::from_parameter(lab), &basis, |b, basis| {
            b.iter(|| GeneratorSet::build(black_box(basis), &q).unwrap())
        });
    }
    g.finish();
}

fn regularized_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("regularized_build");
    for (lab, root) in root_cases() {
        g.bench_with_input(
            BenchmarkId::new(lab.to_string(), root.l()),
            &(lab, root),
            |b, (lab, root)| b.iter(|| RegularizedRep::build(black_box(lab), *root).unwrap()),
        );
    }
    g.finish();
}

fn verification(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_root");
    g.sample_size(20);
    for (lab, root) in root_cases() {
        let rep = RegularizedRep::build(&lab, root).unwrap();
        g.bench_with_input(
            BenchmarkId::new(lab.to_string(), root.l()),
            &rep,
            |b, rep| b.iter(|| verify_root(rep)),
        );
    }
    g.finish();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for (lab, root) in root_cases().into_iter().take(2) {
        let rep = RegularizedRep::build(&lab, root).unwrap();
        g.bench_with_input(
            BenchmarkId::new(lab.to_string(), root.l()),
            &rep,
            |b, rep| b.iter(|| compare_with_oracle(rep, &DEFAULT_EPS).unwrap()),
        );
    }
    g.finish();
}

criterion_group!(
    benches,
    enumerate,
    generic_build,
    regularized_build,
    verification
);
criterion_main!(benches);
