use std::hint::black_box;

use abcweight::adapt::{objective_l, prior_reference, WeightObjectiveContext};
use abcweight::divergence::{Estimator, NeighbourSearch};
use abcweight::harness::build_problem;
use abcweight::models::{simulate_death, simulate_diffusion, ObservationSchedule, DEFAULT_EVENT_CAP};
use abcweight::rng;
use abcweight::smc::simulate_pool;
use abcweight::{ExperimentConfig, SampleSet, WeightVector};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

fn random_set(n: usize, d: usize, seed: u64) -> SampleSet {
    let mut r = rng::from_seed(seed);
    SampleSet::from_flat((0..n * d).map(|_| r.random::<f64>()).collect(), d).unwrap()
}

fn estimator(c: &mut Criterion) {
    let mut group = c.benchmark_group("hellinger");
    for n in [250, 1000, 4000] {
        let x = random_set(n, 2, 1);
        let y = random_set(n, 2, 2);
        for (name, search) in [("brute", NeighbourSearch::BruteForce), ("kdtree", NeighbourSearch::KdTree)] {
            let est = Estimator { search, ..Estimator::new(4) };
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| est.hellinger(black_box(&x), black_box(&y)).unwrap())
            });
        }
    }
    group.finish();
}

fn ssa(c: &mut Criterion) {
    let mut group = c.benchmark_group("ssa");
    let death = ObservationSchedule::linear(32, 20.0).unwrap();
    let mut r = rng::from_seed(3);
    group.bench_function("death", |b| {
        b.iter(|| simulate_death(black_box(0.1), 0.1, 10, &death, DEFAULT_EVENT_CAP, &mut r).unwrap())
    });
    let diffusion = ObservationSchedule::linear(32, 1.0).unwrap();
    group.bench_function("diffusion", |b| {
        b.iter(|| simulate_diffusion(black_box(1.0), 8, 10, &diffusion, DEFAULT_EVENT_CAP, &mut r).unwrap())
    });
    group.finish();
}

fn objective(c: &mut Criterion) {
    let cfg = ExperimentConfig::preset("toy-desk").unwrap();
    let problem = build_problem(&cfg).unwrap();
    let settings = cfg.smc_settings().unwrap();
    let pool = simulate_pool(&problem, &settings, 1, None).unwrap();
    let m = cfg.accepted().unwrap();
    let xi = prior_reference(&problem.prior, m, cfg.seed, 1).unwrap();
    let ctx = WeightObjectiveContext::from_pool(&pool, xi, m, cfg.estimator.estimator()).unwrap();
    let w = WeightVector::uniform(ctx.kappa()).unwrap();
    c.bench_function("objective_toy_desk", |b| b.iter(|| objective_l(black_box(&w), &ctx).unwrap()));
}

criterion_group!(benches, estimator, ssa, objective);
criterion_main!(benches);
