use criterion::{criterion_group, criterion_main, Criterion};
use dfig_bench::disturbed_point;
use dfig_core::model::{generate_window, solve_algebraic, AlgSystem, SystemSeries};
use dfig_core::series::{self, PowerSeries};
use dfig_core::smallsignal::{linearize, ModalReport};
use dfig_core::solver::AlgebraicNewton;
use std::hint::black_box;

fn series_rules(c: &mut Criterion) {
    let x = PowerSeries::new((0..=8).map(|k| 1.0 / (k as f64 + 1.0)).collect(), 0.0).unwrap();
    let z = PowerSeries::new((0..=8).map(|k| 2.0 - 0.1 * k as f64).collect(), 0.0).unwrap();
    c.bench_function("series_mul_order8", |b| b.iter(|| series::mul(black_box(&x), &z)));
    c.bench_function("series_div_order8", |b| b.iter(|| series::div(black_box(&x), &z)));
    c.bench_function("series_sincos_order8", |b| b.iter(|| series::sincos(black_box(&x))));
}

fn window(c: &mut Criterion) {
    let (p, input, x, a) = disturbed_point();
    c.bench_function("generate_window_order8", |b| {
        b.iter(|| generate_window(&p, &input, black_box(&x), &a, 0.0, 8, 1e10).unwrap())
    });
    let seeded = SystemSeries::seed(8, 0.0, &x, &a, &input).unwrap();
    c.bench_function("assemble_alg_matrix", |b| {
        b.iter(|| AlgSystem::assemble(&p, black_box(&seeded), &input, 1e10).unwrap())
    });
}

fn algebraic(c: &mut Criterion) {
    let (p, input, x, a) = disturbed_point();
    c.bench_function("newton_fresh_jacobian", |b| {
        b.iter(|| solve_algebraic(&p, black_box(&x), &a, &input, 1e-13, 30).unwrap())
    });
    let mut newton = AlgebraicNewton::new();
    c.bench_function("newton_reused_factorization", |b| {
        b.iter(|| newton.solve(&p, black_box(&x), &a, &input, 1e-13, 30, 0.0).unwrap())
    });
}

fn modal(c: &mut Criterion) {
    let (p, input, _, _) = disturbed_point();
    let (x, a) = dfig_core::model::equilibrium(&p, &input).unwrap();
    c.bench_function("linearize", |b| b.iter(|| linearize(&p, &input, black_box(&x), &a).unwrap()));
    let m = linearize(&p, &input, &x, &a).unwrap();
    c.bench_function("modal_report_14x14", |b| b.iter(|| ModalReport::from_matrix(black_box(&m)).unwrap()));
}

criterion_group!(benches, series_rules, window, algebraic, modal);
criterion_main!(benches);
