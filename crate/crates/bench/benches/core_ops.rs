use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use cutters::combine::{apply_tw, lambda_hat};
use cutters::solver::{run, LambdaPolicy, SolverConfig};
use cutters::weights::{WeightSchedule, WeightVector};
use cutters_bench::standard_instance;

fn bench_combination(c: &mut Criterion) {
    let inst = standard_instance(50, 10);
    let w = WeightVector::uniform(10).unwrap();
    c.bench_function("apply_tw n=50 m=10", |b| {
        b.iter(|| apply_tw(black_box(&inst.operators), &w, &inst.x0).unwrap())
    });
    c.bench_function("lambda_hat n=50 m=10", |b| {
        b.iter(|| lambda_hat(black_box(&inst.operators), &w, &inst.x0).unwrap())
    });
}

fn bench_schedules(c: &mut Criterion) {
    let e45 = WeightSchedule::example45(10, 20, 7).unwrap();
    let e46 = WeightSchedule::example46(10).unwrap();
    c.bench_function("example45 weights_at", |b| {
        b.iter(|| e45.weights_at(black_box(12345)).unwrap())
    });
    c.bench_function("example46 weights_at", |b| {
        b.iter(|| e46.weights_at(black_box(12345)).unwrap())
    });
}

fn bench_solver(c: &mut Criterion) {
    let inst = standard_instance(10, 6);
    for (name, policy) in [
        ("fixed1", LambdaPolicy::Fixed(1.0)),
        ("max-extrapolation", LambdaPolicy::MaxExtrapolation),
    ] {
        let mut config = SolverConfig::new(WeightSchedule::constant_uniform(6).unwrap());
        config.lambda_policy = policy;
        config.residual_tolerance = 1e-6;
        config.max_iterations = 50_000;
        c.bench_function(&format!("solve n=10 m=6 {name}"), |b| {
            b.iter(|| run(black_box(&inst.operators), &inst.x0, &config))
        });
    }
}

criterion_group!(benches, bench_combination, bench_schedules, bench_solver);
criterion_main!(benches);
