use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dialogue_testkit::{exhaustive_consensus, roundtrip_batch, Execution, GeneratorConfig};

fn executions() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ]
}

fn roundtrip(c: &mut Criterion) {
    let cfg = GeneratorConfig::default();
    let mut group = c.benchmark_group("roundtrip_200");
    group.sample_size(10);
    for (name, exec) in executions() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| roundtrip_batch(&cfg, 200, exec))
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive_3_states");
    group.sample_size(10);
    for (name, exec) in executions() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exhaustive_consensus(3, 3, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, roundtrip, sweep);
criterion_main!(benches);
