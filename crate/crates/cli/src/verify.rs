//! The identity suite behind `verify`.

use std::f64::consts::PI;

use fracperiodic::{
    apply_spectral, check_orthogonality, check_poincare, check_zero_mean, check_zero_mean_kernel,
    energy_identity, kernel_k, normalization_c1s, FracOrder, KernelQuadrature, PeriodicFunction,
    QuadratureConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Source};
use crate::output::OutDir;
use crate::{echo, RunError};

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub identity: String,
    pub parameters: Value,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Entry {
    fn new(identity: &str, parameters: Value, residual: f64, tolerance: f64) -> Self {
        Self { identity: identity.into(), parameters, residual, tolerance, pass: residual <= tolerance }
    }
}

/// Independent stream per (check, sample) so results do not depend on the
/// thread count.
fn rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream((tag << 32) | index);
    r
}

fn random_poly(rng: &mut ChaCha8Rng, max_modes: usize, mean_zero: bool) -> PeriodicFunction {
    let n = rng.random_range(1..=max_modes);
    let a0 = if mean_zero { 0.0 } else { rng.random_range(-1.0..1.0) };
    let a = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    PeriodicFunction::new(a0, a, b).expect("equal lengths")
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn order(s: f64) -> FracOrder {
    FracOrder::new(s).expect("validated order")
}

pub fn suite(cfg: &RunConfig) -> Result<Vec<Entry>, RunError> {
    let v = &cfg.verify;
    let seed = cfg.numerics.seed;
    let q: QuadratureConfig = cfg.quadrature.build();
    let orders: Vec<f64> = v.orders.get_ref().clone();
    let max_modes = *v.max_modes.get_ref();
    let n_random = *v.random_functions.get_ref() as u64;
    let points = *v.kernel_points.get_ref();
    let mut entries = Vec::new();

    for (si, &s) in orders.iter().enumerate() {
        let kq = KernelQuadrature::new(order(s), q)?;
        let errors: Vec<f64> = (0..n_random)
            .into_par_iter()
            .map(|i| {
                let f = random_poly(&mut rng(seed, 1, si as u64 * n_random + i), max_modes, false);
                let spectral = apply_spectral(&f, order(s));
                let mut worst: f64 = 0.0;
                for j in 0..points {
                    let t = 2.0 * PI * j as f64 / points as f64;
                    worst = worst.max((kq.apply(&f, t)? - spectral.eval(t)).abs());
                }
                Ok(worst)
            })
            .collect::<fracperiodic::Result<_>>()?;
        entries.push(Entry::new(
            "operator_cross_oracle",
            json!({ "s": s, "functions": n_random, "points": points, "max_modes": max_modes }),
            max_of(errors),
            (10.0 * q.abs_tol).max(1e-6),
        ));
    }

    let k = kernel_k(PI, order(0.5), 1e-13)?;
    entries.push(Entry::new(
        "kernel_closed_form",
        json!({ "s": 0.5, "z": PI, "expected": 0.25, "value": k.value }),
        (k.value - 0.25).abs(),
        1e-10,
    ));
    let c = normalization_c1s(order(0.5));
    entries.push(Entry::new(
        "normalization_closed_form",
        json!({ "s": 0.5, "expected": 1.0 / PI, "value": c }),
        (c - 1.0 / PI).abs(),
        1e-8,
    ));

    let spectral_means: Vec<f64> = (0..n_random)
        .into_par_iter()
        .map(|i| {
            let f = random_poly(&mut rng(seed, 2, i), max_modes, false);
            max_of(orders.iter().map(|&s| check_zero_mean(&f, order(s))))
        })
        .collect();
    entries.push(Entry::new(
        "zero_mean_spectral",
        json!({ "orders": orders, "functions": n_random }),
        max_of(spectral_means),
        1e-12,
    ));

    let kernel_samples = *v.zero_mean_kernel_samples.get_ref() as u64;
    for (si, &s) in orders.iter().enumerate() {
        let means: Vec<f64> = (0..kernel_samples)
            .into_par_iter()
            .map(|i| {
                let f = random_poly(&mut rng(seed, 3, si as u64 * kernel_samples + i), max_modes, false);
                check_zero_mean_kernel(&f, order(s), &q)
            })
            .collect::<fracperiodic::Result<_>>()?;
        entries.push(Entry::new(
            "zero_mean_kernel",
            json!({ "s": s, "functions": kernel_samples }),
            max_of(means),
            1e-6,
        ));
    }

    let n_orth = *v.orthogonality_samples.get_ref() as u64;
    let orth: Vec<f64> = (0..n_orth)
        .into_par_iter()
        .map(|i| {
            let f = random_poly(&mut rng(seed, 4, i), max_modes, false);
            check_orthogonality(&f, order(orders[i as usize % orders.len()]))
        })
        .collect();
    entries.push(Entry::new(
        "orthogonality",
        json!({ "orders": orders, "functions": n_orth }),
        max_of(orth),
        1e-10,
    ));

    let n_poincare = *v.poincare_samples.get_ref() as u64;
    let ratios: Vec<f64> = (0..n_poincare)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(seed, 5, i);
            let f = random_poly(&mut r, max_modes, true);
            let s = orders[i as usize % orders.len()];
            let (lhs, rhs) = check_poincare(&f, order(s));
            lhs / rhs
        })
        .collect();
    let violations = ratios.iter().filter(|&&r| r > 1.0).count();
    entries.push(Entry::new(
        "poincare",
        json!({
            "orders": orders,
            "functions": n_poincare,
            "constant": "(2π)^{2s}",
            "worst_ratio": max_of(ratios.iter().copied()),
        }),
        violations as f64,
        0.0,
    ));

    let es = *v.energy_s.get_ref();
    let (a, b) = *v.energy_interval.get_ref();
    let cosine = PeriodicFunction::from_modes(1, 0.0, &[(1, 1.0, 0.0)]).expect("one mode");
    let e = energy_identity(&cosine, a, b, order(es), &q)?;
    // ∫_a^b (−sin t) cos t dt
    let exact = -0.5 * (b.sin().powi(2) - a.sin().powi(2));
    entries.push(Entry::new(
        "energy_identity_lhs_closed_form",
        json!({ "u": "cos t", "s": es, "a": a, "b": b, "expected": exact, "lhs": e.lhs }),
        (e.lhs - exact).abs(),
        1e-12,
    ));
    entries.push(Entry::new(
        "energy_identity",
        json!({ "u": "cos t", "s": es, "a": a, "b": b, "breakdown": e }),
        e.residual(),
        (50.0 * q.abs_tol).max(1e-3),
    ));

    let n_triples = *v.additivity_triples.get_ref() as u64;
    let additivity: Vec<(f64, Value)> = (0..n_triples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(seed, 6, i);
            let mut xs = [r.random_range(0.1..4.0), r.random_range(0.1..4.0), r.random_range(0.1..4.0)];
            xs.sort_by(f64::total_cmp);
            let [x, y, z] = xs;
            let whole = energy_identity(&cosine, x, z, order(es), &q)?;
            let left = energy_identity(&cosine, x, y, order(es), &q)?;
            let right = energy_identity(&cosine, y, z, order(es), &q)?;
            let lhs_gap = (whole.lhs - left.lhs - right.lhs).abs();
            let rhs_gap = (whole.rhs_total - left.rhs_total - right.rhs_total).abs();
            Ok((
                lhs_gap.max(rhs_gap),
                json!({ "a": x, "b": y, "c": z, "lhs_gap": lhs_gap, "rhs_gap": rhs_gap }),
            ))
        })
        .collect::<fracperiodic::Result<_>>()?;
    entries.push(Entry::new(
        "energy_additivity",
        json!({ "u": "cos t", "s": es, "triples": additivity.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>() }),
        max_of(additivity.iter().map(|(g, _)| *g)),
        1e-3,
    ));
    Ok(entries)
}

pub fn run(cfg: &RunConfig, source: &Source, out: &mut OutDir) -> Result<bool, RunError> {
    let entries = suite(cfg)?;
    let all_passed = entries.iter().all(|e| e.pass);
    out.json(
        "verify.json",
        &json!({
            "config": echo(cfg, source),
            "note": "The energy identity uses c(1,s) = C(1,s), the normalization of the kernel form of the operator.",
            "all_passed": all_passed,
            "entries": entries,
        }),
    )?;
    Ok(all_passed)
}
