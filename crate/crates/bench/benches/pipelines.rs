use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use smpds_bench::workload;
use smpds_core::headgraph::model_check;
use smpds_core::oracle::cross_check;

fn direct(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct");
    group.sample_size(10);
    for (s1, s2) in [(20, 3), (110, 8)] {
        let (b, phi) = workload(s1, s2, 1);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{s1}x{s2}")), &(), |bench, _| {
            bench.iter(|| model_check(&b.model, &b.theta0, &b.c0, &phi).unwrap().verdict().accepting())
        });
    }
    group.finish();
}

fn both_pipelines(c: &mut Criterion) {
    let mut group = c.benchmark_group("cross_check");
    group.sample_size(10);
    let (b, phi) = workload(20, 3, 2);
    group.bench_function("20x3", |bench| {
        bench.iter(|| cross_check(&b.model, &b.theta0, &b.c0, &phi).unwrap().agree())
    });
    group.finish();
}

criterion_group!(benches, direct, both_pipelines);
criterion_main!(benches);
