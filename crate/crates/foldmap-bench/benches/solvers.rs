//! Hot-path benchmarks: single branch-point evaluations, a short trace,
//! one minimal-solution run, and fold detection on a folded diagram.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use foldmap::continuation::{trace_branch, TraceConfig};
use foldmap::defaults;
use foldmap::nonlinearity::Nonlinearity;
use foldmap::problem::ProblemSpec;
use foldmap::solvers::minimal::minimal_solution;
use foldmap::solvers::operator_for;
use foldmap::solvers::shooting::RadialShoot;
use foldmap::solvers::time_map::TimeMap;
use foldmap::topology::detect_folds_in_problem;

fn time_map_point(c: &mut Criterion) {
    let problem = ProblemSpec::interval(1.0, Nonlinearity::Exponential);
    let map = TimeMap::new(&problem).unwrap();
    c.bench_function("time_map_lambda_gelfand", |b| {
        b.iter(|| map.lambda(black_box(1.2)).unwrap())
    });

    let saturated = ProblemSpec::interval(2.0, Nonlinearity::arrhenius(0.2));
    let map = TimeMap::new(&saturated).unwrap();
    c.bench_function("time_map_lambda_arrhenius", |b| {
        b.iter(|| map.lambda(black_box(8.0)).unwrap())
    });
}

fn radial_shoot_point(c: &mut Criterion) {
    let problem = ProblemSpec::ball(3, 1.0, Nonlinearity::Exponential);
    let map = RadialShoot::new(&problem).unwrap();
    c.bench_function("radial_shoot_lambda_d3", |b| {
        b.iter(|| map.lambda(black_box(5.0)).unwrap())
    });
}

fn short_trace(c: &mut Criterion) {
    let problem = ProblemSpec::interval(2.0, Nonlinearity::arrhenius(0.2));
    let mut tc = TraceConfig::new(20.0);
    tc.initial_steps = 96;
    tc.refine_rounds = 1;
    c.bench_function("trace_branch_96_steps", |b| {
        b.iter(|| trace_branch(black_box(&problem), &tc).unwrap())
    });
}

fn fold_scan(c: &mut Criterion) {
    let problem = ProblemSpec::interval(2.0, Nonlinearity::arrhenius(0.2));
    let tc = TraceConfig::new(20.0);
    let branch = trace_branch(&problem, &tc).unwrap();
    c.bench_function("detect_folds_arrhenius", |b| {
        b.iter(|| detect_folds_in_problem(&problem, black_box(&branch), defaults::FOLD_TOL_1D).unwrap())
    });
}

fn minimal_point(c: &mut Criterion) {
    let problem = ProblemSpec::interval(1.0, Nonlinearity::Exponential);
    let op = operator_for(&problem, defaults::GRID_N_1D).unwrap();
    c.bench_function("minimal_solution_lambda_1", |b| {
        b.iter(|| {
            minimal_solution(
                &problem.nonlinearity,
                &op,
                black_box(1.0),
                0.0,
                defaults::ITER_TOL,
                defaults::BLOW_CAP,
                200_000,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    time_map_point,
    radial_shoot_point,
    short_trace,
    fold_scan,
    minimal_point
);
criterion_main!(benches);
