//! Periodic solutions of the fractional Liénard equation
//! `(Δ)^s u + f(C + u) u′ = w` and of its gradient-drift vector analogue.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_op::{apply_spectral, FracOrder};
use crate::iterate::{self, linear_block, multiplier_block, CoefficientSystem, IterationConfig, Layout};
use crate::linear::{solve_linear, SOLVABILITY_TOL};
use crate::nonlinearity::Nonlinearity;
use crate::report::{Checks, SolveReport};
use crate::trig::{grid_nodes, min_grid, PeriodicFunction, DEFAULT_REFINEMENT};

/// `w̄`; the scalar problem is solvable only when it vanishes.
pub fn check_solvability(w: &PeriodicFunction) -> f64 {
    w.mean()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LienardProblem {
    pub f: Nonlinearity,
    pub w: PeriodicFunction,
    pub s: FracOrder,
    /// The free constant `C`; the solution is `C + u` with `u` of mean zero.
    pub mean_level: f64,
}

/// Samples of `u` and `u′` on `m` nodes, checked against the domain of `f`.
fn samples_with_derivative(u: &PeriodicFunction, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((u.synthesize(m)?, u.derivative().synthesize(m)?))
}

fn check_domain(phi: &Nonlinearity, values: &[f64]) -> Result<()> {
    if phi.requires_positive() {
        if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::DomainViolation(format!("argument {v:e} is not positive")));
        }
    }
    Ok(())
}

/// `P_N[f(C + z) z′]` by oversampled collocation.
fn drift(f: &Nonlinearity, level: f64, z: &PeriodicFunction, m: usize) -> Result<PeriodicFunction> {
    let shifted = z.with_mean(level + z.mean());
    let (vals, ders) = samples_with_derivative(&shifted, m)?;
    check_domain(f, &vals)?;
    let prod: Vec<f64> = vals.iter().zip(&ders).map(|(v, d)| f.eval(*v) * d).collect();
    PeriodicFunction::analyze(&prod, z.n_modes())
}

struct LienardSystem<'a> {
    p: &'a LienardProblem,
    lambda: f64,
    n_modes: usize,
    m: usize,
    w: PeriodicFunction,
    df: Nonlinearity,
}

impl LienardSystem<'_> {
    fn unpack(&self, x: &[f64]) -> Result<PeriodicFunction> {
        Layout::ZeroMean.unpack(x)
    }
}

impl CoefficientSystem for LienardSystem<'_> {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.unpack(x)?;
        let d = drift(&self.p.f, self.p.mean_level, &z, self.m)?;
        let r =
            &(&apply_spectral(&z, self.p.s).scale(-1.0) + &d.scale(self.lambda)) - &self.w.scale(self.lambda);
        Ok(Layout::ZeroMean.pack(&r))
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let z = self.unpack(x)?.with_mean(self.p.mean_level);
        let (vals, ders) = samples_with_derivative(&z, self.m)?;
        check_domain(&self.p.f, &vals)?;
        let fv: Vec<f64> = vals.iter().map(|v| self.lambda * self.p.f.eval(*v)).collect();
        let dfv: Vec<f64> = vals.iter().zip(&ders).map(|(v, d)| self.lambda * self.df.eval(*v) * d).collect();
        let grid = multiplier_block(self.n_modes, Layout::ZeroMean, Some(&dfv), Some(&fv), false)?;
        Ok(linear_block(self.n_modes, Layout::ZeroMean, self.p.s, -1.0, 0.0, 0.0) + grid)
    }

    /// `T(z) = (A_s + I)^{-1} [z + λ f(C+z) z′ − λ w]`.
    fn picard(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some((|| {
            let z = self.unpack(x)?;
            let d = drift(&self.p.f, self.p.mean_level, &z, self.m)?;
            let rhs = &(&z + &d.scale(self.lambda)) - &self.w.scale(self.lambda);
            let t = solve_linear(&rhs.without_mean(), self.p.s, 1.0, 0.0)?;
            Ok(Layout::ZeroMean.pack(&t))
        })())
    }
}

/// Pointwise residual `−A_s u + λ f(u) u′ − λ w` on `m` nodes, by direct
/// summation of each series; returns the coefficient-equivalent l2 norm
/// `sqrt(2·mean(r²))` and the samples.
fn pointwise_residual(
    u: &PeriodicFunction,
    s: FracOrder,
    f: &Nonlinearity,
    w: &PeriodicFunction,
    lambda: f64,
    m: usize,
) -> (f64, Vec<f64>) {
    let au = apply_spectral(u, s);
    let du = u.derivative();
    let r: Vec<f64> = grid_nodes(m)
        .into_iter()
        .map(|t| -au.eval(t) + lambda * (f.eval(u.eval(t)) * du.eval(t) - w.eval(t)))
        .collect();
    let ms = r.iter().map(|v| v * v).sum::<f64>() / m as f64;
    ((2.0 * ms).sqrt(), r)
}

/// Trapezoidal `∫_0^{2π}` of `g(t)` on `m` nodes.
fn periodic_integral(m: usize, g: impl Fn(f64) -> f64) -> f64 {
    2.0 * PI * grid_nodes(m).into_iter().map(g).sum::<f64>() / m as f64
}

fn check_order(s: FracOrder) -> Result<()> {
    s.require_standard().map(|_| ())
}

/// Solves `(Δ)^s u + λ f(C + u) u′ = λ w` for mean-zero `u`, with `λ` from
/// `cfg.continuation_lambda`.
///
/// Iterates the damped fixed-point map `T` with Newton acceleration.
pub fn solve_lienard(p: &LienardProblem, cfg: &IterationConfig) -> Result<SolveReport> {
    solve_lienard_from(p, cfg, None)
}

/// As [`solve_lienard`], starting from a given mean-zero iterate.
pub fn solve_lienard_from(
    p: &LienardProblem,
    cfg: &IterationConfig,
    start: Option<&PeriodicFunction>,
) -> Result<SolveReport> {
    cfg.validate()?;
    check_order(p.s)?;
    let mean = check_solvability(&p.w);
    if mean.abs() > SOLVABILITY_TOL {
        return Err(Error::SolvabilityViolation { mean });
    }
    let n_modes = p.w.n_modes();
    let sys = LienardSystem {
        p,
        lambda: cfg.continuation_lambda,
        n_modes,
        m: DEFAULT_REFINEMENT * min_grid(n_modes),
        w: p.w.without_mean(),
        df: p.f.derivative(),
    };
    let x0 = match start {
        Some(z) => Layout::ZeroMean.pack(&z.resized(n_modes).without_mean()),
        None => vec![0.0; Layout::ZeroMean.len(n_modes)],
    };
    let out = iterate::solve(&sys, x0, cfg)?;
    let u = Layout::ZeroMean.unpack(&out.x)?;
    let full = u.with_mean(p.mean_level);

    let fine = 2 * sys.m;
    let (verified, _) = pointwise_residual(&full, p.s, &p.f, &p.w, sys.lambda, fine);
    let du = u.derivative();
    let drift_neutrality = periodic_integral(fine, |t| p.f.eval(full.eval(t)) * du.eval(t) * u.eval(t)).abs();
    let mean_identity =
        periodic_integral(fine, |t| sys.lambda * (p.f.eval(full.eval(t)) * du.eval(t) - p.w.eval(t))).abs();

    Ok(SolveReport {
        problem_echo: serde_json::to_value(p).unwrap_or_default(),
        converged: true,
        iterations: out.iterations(),
        newton_steps: out.newton_steps,
        picard_steps: out.picard_steps,
        residual: out.residual,
        verified_residual: verified,
        residual_history: out.history,
        checks: Checks {
            mean_identity: Some(mean_identity),
            drift_neutrality: Some(drift_neutrality),
            high_mode_fraction: u.high_mode_fraction(),
            min_value: full.min_value(),
            max_value: full.max_value(),
            ..Checks::default()
        },
        solution: vec![full],
        mean_levels: vec![p.mean_level],
        bounds: None,
        continuation: Vec::new(),
        notes: Vec::new(),
    })
}

/// One monomial `coef · Π x_i^{k_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub exponents: Vec<u32>,
}

/// A polynomial potential `H: ℝⁿ → ℝ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(monomials: Vec<Monomial>) -> Self {
        Self { monomials }
    }

    /// `(u_1² + … + u_n²)² / 4`.
    pub fn quartic_radial(n: usize) -> Self {
        let mut monomials = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut exponents = vec![0; n];
                exponents[i] += 2;
                exponents[j] += 2;
                monomials.push(Monomial { coef: if i == j { 0.25 } else { 0.5 }, exponents });
            }
        }
        Self { monomials }
    }

    fn power(x: f64, k: u32) -> f64 {
        x.powi(k as i32)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials
            .iter()
            .map(|m| m.coef * m.exponents.iter().zip(x).map(|(&k, &v)| Self::power(v, k)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for m in &self.monomials {
            for i in 0..x.len() {
                let ki = m.exponents.get(i).copied().unwrap_or(0);
                if ki == 0 {
                    continue;
                }
                let mut term = m.coef * ki as f64;
                for (j, &v) in x.iter().enumerate() {
                    let kj = m.exponents.get(j).copied().unwrap_or(0);
                    term *= Self::power(v, if j == i { kj - 1 } else { kj });
                }
                g[i] += term;
            }
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut h = vec![vec![0.0; n]; n];
        for m in &self.monomials {
            let k = |i: usize| m.exponents.get(i).copied().unwrap_or(0);
            for i in 0..n {
                for j in 0..n {
                    let (ki, kj) = (k(i), k(j));
                    let factor = if i == j { (ki * ki.saturating_sub(1)) as f64 } else { (ki * kj) as f64 };
                    if factor == 0.0 {
                        continue;
                    }
                    let mut term = m.coef * factor;
                    for (l, &v) in x.iter().enumerate() {
                        let mut e = k(l);
                        if l == i {
                            e -= 1;
                        }
                        if l == j {
                            e -= 1;
                        }
                        term *= Self::power(v, e);
                    }
                    h[i][j] += term;
                }
            }
        }
        h
    }
}

/// `−A_{s_i} v_i + d/dt ∂_i H(ū + v) + (A v)_i = w_i` with `A ū = ē`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemProblem {
    pub s: Vec<FracOrder>,
    pub potential: Polynomial,
    /// Row-major `n × n` coupling matrix.
    pub a: Vec<Vec<f64>>,
    pub e: Vec<PeriodicFunction>,
}

/// Results of the structural checks on a [`SystemProblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConditions {
    /// Largest eigenvalue of the symmetric part of `A`.
    pub m: f64,
    /// Minimum-norm least-squares solution of `A ū = ē`.
    pub u_bar: Vec<f64>,
    /// `‖A ū − ē‖`.
    pub consistency_residual: f64,
}

/// Bound on `‖Aū − ē‖` accepted as `ē ∈ Im A`.
pub const RANGE_TOL: f64 = 1e-10;

impl SystemProblem {
    pub fn dim(&self) -> usize {
        self.e.len()
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.a[i][j])
    }

    /// Checks `M < 1` and `ē ∈ Im A`, returning `M` and `ū`.
    pub fn conditions(&self) -> Result<SystemConditions> {
        let n = self.dim();
        if n == 0 || self.s.len() != n || self.a.len() != n || self.a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "system of dimension {n} needs {n} orders and an {n}×{n} matrix"
            )));
        }
        for s in &self.s {
            check_order(*s)?;
        }
        let a = self.matrix();
        let sym = (&a + a.transpose()) * 0.5;
        let m = SymmetricEigen::new(sym).eigenvalues.max();
        if !(m < 1.0) {
            return Err(Error::ConditionViolation(format!(
                "largest eigenvalue of the symmetric part of A is {m}, need < 1"
            )));
        }
        let e_bar = DVector::from_iterator(n, self.e.iter().map(|e| e.mean()));
        let svd = a.clone().svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max().max(1.0);
        let u_bar = svd.solve(&e_bar, cutoff).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let consistency_residual = (&a * &u_bar - &e_bar).norm();
        if consistency_residual > RANGE_TOL {
            return Err(Error::ConditionViolation(format!(
                "mean forcing is not in the range of A (residual {consistency_residual:e})"
            )));
        }
        Ok(SystemConditions { m, u_bar: u_bar.iter().copied().collect(), consistency_residual })
    }
}

struct VectorSystem<'a> {
    p: &'a SystemProblem,
    u_bar: Vec<f64>,
    w: Vec<PeriodicFunction>,
    lambda: f64,
    n_modes: usize,
    m: usize,
}

impl VectorSystem<'_> {
    fn block(&self) -> usize {
        2 * self.n_modes
    }

    fn unpack(&self, x: &[f64]) -> Result<Vec<PeriodicFunction>> {
        x.chunks(self.block()).map(|c| Layout::ZeroMean.unpack(c)).collect()
    }

    /// Samples of `ū + v` per node, `[node][component]`.
    fn state_samples(&self, v: &[PeriodicFunction]) -> Result<Vec<Vec<f64>>> {
        let comp: Vec<Vec<f64>> = v.iter().map(|c| c.synthesize(self.m)).collect::<Result<_>>()?;
        Ok((0..self.m).map(|j| comp.iter().zip(&self.u_bar).map(|(c, ub)| c[j] + ub).collect()).collect())
    }

    /// `d/dt P_N[∂_i H(ū + v)]` per component.
    fn gradient_drift(&self, v: &[PeriodicFunction]) -> Result<Vec<PeriodicFunction>> {
        let states = self.state_samples(v)?;
        let grads: Vec<Vec<f64>> = states.iter().map(|x| self.p.potential.gradient(x)).collect();
        (0..v.len())
            .map(|i| {
                let gi: Vec<f64> = grads.iter().map(|g| g[i]).collect();
                Ok(PeriodicFunction::analyze(&gi, self.n_modes)?.derivative())
            })
            .collect()
    }

    fn coupling(&self, v: &[PeriodicFunction], i: usize) -> PeriodicFunction {
        let mut acc = PeriodicFunction::zeros(self.n_modes);
        for (j, vj) in v.iter().enumerate() {
            acc = &acc + &vj.scale(self.p.a[i][j]);
        }
        acc
    }

    /// `d/dt ∂_i H + (Av)_i − w_i`, the part scaled by `λ`.
    fn forcing_terms(&self, v: &[PeriodicFunction]) -> Result<Vec<PeriodicFunction>> {
        let drift = self.gradient_drift(v)?;
        Ok((0..v.len()).map(|i| &(&drift[i] + &self.coupling(v, i)) - &self.w[i]).collect())
    }
}

impl CoefficientSystem for VectorSystem<'_> {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = self.unpack(x)?;
        let terms = self.forcing_terms(&v)?;
        let mut out = Vec::with_capacity(x.len());
        for (i, vi) in v.iter().enumerate() {
            let r = &apply_spectral(vi, self.p.s[i]).scale(-1.0) + &terms[i].scale(self.lambda);
            out.extend(Layout::ZeroMean.pack(&r));
        }
        Ok(out)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let v = self.unpack(x)?;
        let states = self.state_samples(&v)?;
        let hess: Vec<Vec<Vec<f64>>> = states.iter().map(|s| self.p.potential.hessian(s)).collect();
        let n = v.len();
        let blk = self.block();
        let mut jac = DMatrix::zeros(n * blk, n * blk);
        for i in 0..n {
            for j in 0..n {
                let hij: Vec<f64> = hess.iter().map(|h| self.lambda * h[i][j]).collect();
                let mut b = multiplier_block(self.n_modes, Layout::ZeroMean, Some(&hij), None, true)?;
                let diag_factor = if i == j { -1.0 } else { 0.0 };
                b += linear_block(
                    self.n_modes,
                    Layout::ZeroMean,
                    self.p.s[i],
                    diag_factor,
                    self.lambda * self.p.a[i][j],
                    0.0,
                );
                jac.view_mut((i * blk, j * blk), (blk, blk)).copy_from(&b);
            }
        }
        Ok(jac)
    }

    fn picard(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some((|| {
            let v = self.unpack(x)?;
            let terms = self.forcing_terms(&v)?;
            let mut out = Vec::with_capacity(x.len());
            for (i, vi) in v.iter().enumerate() {
                let rhs = vi + &terms[i].scale(self.lambda);
                let t = solve_linear(&rhs.without_mean(), self.p.s[i], 1.0, 0.0)?;
                out.extend(Layout::ZeroMean.pack(&t));
            }
            Ok(out)
        })())
    }
}

/// Solves the vector problem: `ū` from `A ū = ē`, then mean-zero `v`.
pub fn solve_system(p: &SystemProblem, cfg: &IterationConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let cond = p.conditions()?;
    let n_modes = p.e.iter().map(|e| e.n_modes()).max().unwrap_or(1);
    let a = p.matrix();
    let ub = DVector::from_vec(cond.u_bar.clone());
    let a_ubar = &a * &ub;
    let w: Vec<PeriodicFunction> =
        p.e.iter()
            .enumerate()
            .map(|(i, e)| {
                let e = e.resized(n_modes);
                e.with_mean(e.mean() - a_ubar[i])
            })
            .collect();
    let sys = VectorSystem {
        p,
        u_bar: cond.u_bar.clone(),
        w,
        lambda: cfg.continuation_lambda,
        n_modes,
        m: DEFAULT_REFINEMENT * min_grid(n_modes),
    };
    let x0 = vec![0.0; p.dim() * sys.block()];
    let out = iterate::solve(&sys, x0, cfg)?;
    let v = sys.unpack(&out.x)?;

    // Independent pointwise re-evaluation on a finer grid.
    let fine = 2 * sys.m;
    let nodes = grid_nodes(fine);
    let dv: Vec<PeriodicFunction> = v.iter().map(|c| c.derivative()).collect();
    let av: Vec<PeriodicFunction> = v.iter().zip(&p.s).map(|(c, s)| apply_spectral(c, *s)).collect();
    let mut sq = 0.0;
    let mut neutrality = 0.0;
    let mut mean_identity = vec![0.0; p.dim()];
    for &t in &nodes {
        let state: Vec<f64> = v.iter().zip(&cond.u_bar).map(|(c, ub)| c.eval(t) + ub).collect();
        let vel: Vec<f64> = dv.iter().map(|c| c.eval(t)).collect();
        let h = p.potential.hessian(&state);
        for i in 0..p.dim() {
            // d/dt ∂_i H(ū + v) = Σ_j H_ij v_j′
            let drift: f64 = (0..p.dim()).map(|j| h[i][j] * vel[j]).sum();
            let coupling: f64 = (0..p.dim()).map(|j| p.a[i][j] * (state[j] - cond.u_bar[j])).sum();
            let rest = drift + coupling - sys.w[i].eval(t);
            let r = -av[i].eval(t) + sys.lambda * rest;
            sq += r * r;
            neutrality += drift * v[i].eval(t);
            mean_identity[i] += rest;
        }
    }
    let verified = (2.0 * sq / fine as f64).sqrt();
    let scale = 2.0 * PI / fine as f64;
    let mean_identity = mean_identity.iter().map(|m| (m * scale).abs()).fold(0.0, f64::max);

    let solution: Vec<PeriodicFunction> = v.iter().zip(&cond.u_bar).map(|(c, ub)| c.with_mean(*ub)).collect();
    let min_value = solution.iter().map(|c| c.min_value()).fold(f64::INFINITY, f64::min);
    let max_value = solution.iter().map(|c| c.max_value()).fold(f64::NEG_INFINITY, f64::max);
    let high = v.iter().map(|c| c.high_mode_fraction()).fold(0.0, f64::max);
    Ok(SolveReport {
        problem_echo: serde_json::to_value(p).unwrap_or_default(),
        converged: true,
        iterations: out.iterations(),
        newton_steps: out.newton_steps,
        picard_steps: out.picard_steps,
        residual: out.residual,
        verified_residual: verified,
        residual_history: out.history,
        solution,
        mean_levels: cond.u_bar.clone(),
        checks: Checks {
            mean_identity: Some(mean_identity),
            drift_neutrality: Some((neutrality * scale).abs()),
            high_mode_fraction: high,
            min_value,
            max_value,
            ..Checks::default()
        },
        bounds: None,
        continuation: Vec::new(),
        notes: vec![format!("symmetric part of A has largest eigenvalue {}", cond.m)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn solvability_is_the_mean() {
        assert_eq!(check_solvability(&PeriodicFunction::basis(2, 1, false)), 0.0);
        let w = PeriodicFunction::from_modes(2, 1.0, &[(1, 1.0, 0.0)]).unwrap();
        assert_eq!(check_solvability(&w), 1.0);
    }

    #[test]
    fn drift_free_problem_is_one_linear_solve() {
        let p = LienardProblem {
            f: Nonlinearity::zero(),
            w: PeriodicFunction::basis(8, 1, false),
            s: order(0.75),
            mean_level: 0.0,
        };
        let rep = solve_lienard(&p, &IterationConfig::default()).unwrap();
        let expect = PeriodicFunction::basis(8, 1, false).scale(-1.0);
        assert!((rep.u() - &expect).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn linear_drift_converges() {
        let p = LienardProblem {
            f: Nonlinearity::from_pairs(&[(1.0, 1.0)]),
            w: PeriodicFunction::basis(16, 1, true).scale(0.3),
            s: order(0.75),
            mean_level: 0.0,
        };
        let rep = solve_lienard(&p, &IterationConfig::default()).unwrap();
        assert!(rep.residual <= 1e-10);
        assert!(rep.verified_residual <= 1e-9);
        assert_eq!(rep.mean_zero_part(0).mean(), 0.0);
        assert!(rep.checks.drift_neutrality.unwrap() <= 1e-8);
    }

    #[test]
    fn picard_alone_converges_for_small_forcing() {
        let p = LienardProblem {
            f: Nonlinearity::from_pairs(&[(1.0, 1.0)]),
            w: PeriodicFunction::basis(8, 1, true).scale(0.1),
            s: order(0.75),
            mean_level: 0.0,
        };
        let cfg = IterationConfig { newton: false, max_iterations: 500, ..Default::default() };
        let rep = solve_lienard(&p, &cfg).unwrap();
        assert_eq!(rep.newton_steps, 0);
        assert!(rep.residual <= 1e-10);
    }

    #[test]
    fn nonzero_mean_forcing_is_rejected() {
        let p = LienardProblem {
            f: Nonlinearity::from_pairs(&[(1.0, 1.0)]),
            w: PeriodicFunction::from_modes(4, 0.2, &[(1, 1.0, 0.0)]).unwrap(),
            s: order(0.75),
            mean_level: 0.0,
        };
        assert!(matches!(
            solve_lienard(&p, &IterationConfig::default()),
            Err(Error::SolvabilityViolation { .. })
        ));
    }

    #[test]
    fn polynomial_derivatives() {
        let h = Polynomial::quartic_radial(2);
        let x = [0.7, -1.3];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert!((h.eval(&x) - r2 * r2 / 4.0).abs() < 1e-14);
        let g = h.gradient(&x);
        assert!((g[0] - r2 * x[0]).abs() < 1e-14);
        let hs = h.hessian(&x);
        assert!((hs[0][1] - 2.0 * x[0] * x[1]).abs() < 1e-14);
        assert!((hs[1][1] - (r2 + 2.0 * x[1] * x[1])).abs() < 1e-14);
    }

    fn system(a: f64) -> SystemProblem {
        SystemProblem {
            s: vec![order(0.6), order(0.9)],
            potential: Polynomial::quartic_radial(2),
            a: vec![vec![a, 0.0], vec![0.0, a]],
            e: vec![
                PeriodicFunction::basis(16, 1, false).scale(0.1),
                PeriodicFunction::basis(16, 1, true).scale(0.1),
            ],
        }
    }

    #[test]
    fn coupled_system_converges() {
        let cfg = IterationConfig { residual_tol: 1e-10, ..Default::default() };
        let rep = solve_system(&system(0.5), &cfg).unwrap();
        assert!(rep.residual <= 1e-10);
        assert!(rep.verified_residual <= 1e-8);
        assert!(rep.checks.drift_neutrality.unwrap() <= 1e-10);
    }

    #[test]
    fn expansive_coupling_is_rejected() {
        assert!(matches!(
            solve_system(&system(2.0), &IterationConfig::default()),
            Err(Error::ConditionViolation(_))
        ));
    }
}
