use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hcsim_bench::{high_spec, long_scenario, pack_eet, EET_HETERO, MACHINES, WORKLOAD_HIGH};
use hcsim_core::{generate_workload, load_scenario, render_report, run, PolicyRegistry, QueueCapacity, ReportKind};

fn capacity(registry: &PolicyRegistry, policy: &str) -> QueueCapacity {
    match registry.mode_of(&registry.resolve(policy).unwrap()).unwrap() {
        hcsim_core::Mode::Batch => QueueCapacity::bounded(3).unwrap(),
        hcsim_core::Mode::Immediate => QueueCapacity::Unbounded,
    }
}

fn policies(c: &mut Criterion) {
    let registry = PolicyRegistry::with_builtins();
    let scenario = long_scenario(2_000.0);
    let mut group = c.benchmark_group("run");
    group.throughput(Throughput::Elements(scenario.workload.len() as u64));
    for policy in ["fcfs", "mect", "meet", "mm", "mmu", "msd"] {
        let config = registry.config(policy, capacity(&registry, policy), 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(policy), &config, |b, config| {
            b.iter(|| run(black_box(scenario.clone()), config.clone(), &registry).unwrap())
        });
    }
    group.finish();
}

fn io(c: &mut Criterion) {
    let registry = PolicyRegistry::with_builtins();
    c.bench_function("load_scenario", |b| {
        b.iter(|| load_scenario(black_box(EET_HETERO), MACHINES, WORKLOAD_HIGH).unwrap())
    });
    let eet = pack_eet();
    let spec = high_spec();
    c.bench_function("generate_workload", |b| b.iter(|| generate_workload(black_box(&spec), &eet).unwrap()));
    let scenario = load_scenario(EET_HETERO, MACHINES, WORKLOAD_HIGH).unwrap();
    let outcome =
        run(scenario, registry.config("mm", QueueCapacity::bounded(3).unwrap(), 0).unwrap(), &registry).unwrap();
    c.bench_function("render_full_report", |b| b.iter(|| render_report(black_box(&outcome), ReportKind::Full)));
}

criterion_group!(benches, policies, io);
criterion_main!(benches);
