use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use peca_core::emulator::{run_loop, PulseTrainConfig};
use peca_core::{photonic_step, step, step_packed, Boundary, Generation, PhotonicConfig, RuleTable, Weights};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn row(width: usize) -> Generation {
    Generation::random(width, Boundary::Periodic, &mut ChaCha8Rng::seed_from_u64(1))
}

fn steppers(c: &mut Criterion) {
    let rule = RuleTable::new(30);
    let mut group = c.benchmark_group("step");
    for width in [1024usize, 65536] {
        let g = row(width);
        group.throughput(Throughput::Elements(width as u64));
        group.bench_with_input(BenchmarkId::new("packed", width), &g, |b, g| b.iter(|| step_packed(g, &rule)));
        group.bench_with_input(BenchmarkId::new("table", width), &g, |b, g| b.iter(|| step(g, &rule)));
        let cfg = PhotonicConfig::new(Weights::new(1.0, -0.6, -0.6), 0.25).unwrap();
        group.bench_with_input(BenchmarkId::new("photonic", width), &g, |b, g| b.iter(|| photonic_step(g, &cfg)));
    }
    group.finish();
}

fn emulator(c: &mut Criterion) {
    let g = row(1024);
    let cfg = PulseTrainConfig::new(1024, PhotonicConfig::new(Weights::new(1.0, 0.0, -1.0), 0.5).unwrap(), Boundary::Periodic).unwrap();
    let mut group = c.benchmark_group("emulator");
    group.throughput(Throughput::Elements(1024 * 16));
    group.bench_function("loop_1024x16", |b| b.iter(|| run_loop(&g, &cfg, 16).unwrap()));
    group.finish();
}

criterion_group!(benches, steppers, emulator);
criterion_main!(benches);
