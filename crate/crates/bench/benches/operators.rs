use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracperiodic::{
    apply_spectral, kernel_k, solve_attractive, solve_lienard, solve_linear, trace_branch, AttractiveProblem,
    BifurcationProblem, BranchConfig, FracOrder, IterationConfig, KernelQuadrature, LienardProblem,
    Nonlinearity, OperatorSign, PeriodicFunction, QuadratureConfig,
};

fn order(s: f64) -> FracOrder {
    FracOrder::new(s).unwrap()
}

/// Deterministic test function with decaying modes.
fn sample(n_modes: usize) -> PeriodicFunction {
    let a = (1..=n_modes).map(|n| (n as f64).sin() / n as f64).collect();
    let b = (1..=n_modes).map(|n| (n as f64).cos() / n as f64).collect();
    PeriodicFunction::new(0.3, a, b).unwrap()
}

fn operators(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply_spectral");
    for n in [16, 256, 4096] {
        let f = sample(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| apply_spectral(black_box(f), order(0.75)))
        });
    }
    g.finish();

    c.bench_function("kernel_k/z=1,tol=1e-12", |b| {
        b.iter(|| kernel_k(black_box(1.0), order(0.75), 1e-12).unwrap())
    });

    let kq = KernelQuadrature::new(order(0.75), QuadratureConfig::default()).unwrap();
    let f = sample(16);
    c.bench_function("kernel_quadrature/point,N=16", |b| {
        b.iter(|| kq.apply(&f, black_box(PI / 3.0)).unwrap())
    });

    let r = sample(256).without_mean();
    c.bench_function("solve_linear/N=256", |b| {
        b.iter(|| solve_linear(black_box(&r), order(0.75), 1.0, 0.5).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let cfg = IterationConfig::default();
    let lienard = LienardProblem {
        f: Nonlinearity::from_pairs(&[(1.0, 1.0)]),
        w: PeriodicFunction::from_modes(32, 0.0, &[(1, 0.0, 0.3)]).unwrap(),
        s: order(0.75),
        mean_level: 0.0,
    };
    c.bench_function("solve_lienard/N=32", |b| b.iter(|| solve_lienard(black_box(&lienard), &cfg).unwrap()));

    let e = PeriodicFunction::from_modes(32, 2.0, &[(1, 0.5, 0.0)]).unwrap();
    let attractive = AttractiveProblem::forbat(1.0, &Nonlinearity::zero(), &e, order(0.75)).unwrap();
    c.bench_function("solve_attractive/forbat,N=32", |b| {
        b.iter(|| solve_attractive(black_box(&attractive), &cfg).unwrap())
    });

    let branch = BifurcationProblem {
        c: 1.0,
        big_g: Nonlinearity::from_pairs(&[(1.0, -1.0)]),
        e: PeriodicFunction::from_modes(16, 1.0, &[(1, 0.2, 0.0)]).unwrap(),
        s: order(0.75),
        mu_range: (1e-3, 2.0),
        operator_sign: OperatorSign::Laplacian,
    };
    let mut g = c.benchmark_group("trace_branch");
    g.sample_size(10);
    g.bench_function("G=1/u,N=16", |b| {
        b.iter(|| trace_branch(black_box(&branch), &cfg, &BranchConfig::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, operators, solvers);
criterion_main!(benches);
