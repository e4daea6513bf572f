//! Positive periodic solutions with a singular nonlinearity `g`.
//!
//! Attractive case: `(Δ)^s u + f(u) u′ + g(u) = e`, solved by the truncated
//! iteration between a constant subsolution `η` and a supersolution `β`.
//!
//! Repulsive case: `(Δ)^s u + c u′ − g(u) = e`, solved by continuation in the
//! homotopy `(Δ)^s u + c u′ = (1−λ) mean(g(u) + e) + λ (g(u) + e)` from a
//! constant root at `λ = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_op::{apply_spectral, FracOrder, OperatorSign};
use crate::iterate::{self, IterationConfig, Layout};
use crate::lienard::{solve_lienard, LienardProblem};
use crate::linear::solve_linear;
use crate::nonlinearity::{Nonlinearity, PowerTerm};
use crate::quad;
use crate::report::{Checks, ContinuationStep, SolveReport};
use crate::semilinear::Semilinear;
use crate::trig::{grid_nodes, min_grid, PeriodicFunction, DEFAULT_REFINEMENT, SUP_REFINEMENT};

/// Outcome of one numerical hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ConditionCheck {
    pub(crate) fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

/// Fails on the first failed check.
pub fn require(checks: Vec<ConditionCheck>) -> Result<Vec<ConditionCheck>> {
    if let Some(bad) = checks.iter().find(|c| !c.passed) {
        return Err(Error::ConditionViolation(format!("{}: {}", bad.name, bad.detail)));
    }
    Ok(checks)
}

/// `10^{k/per_decade}` from `lo` to `hi` inclusive.
pub(crate) fn log_grid(lo_exp: i32, hi_exp: i32, per_decade: i32) -> Vec<f64> {
    (lo_exp * per_decade..=hi_exp * per_decade).map(|k| 10f64.powf(k as f64 / per_decade as f64)).collect()
}

/// `g` blows up at `0⁺` and decreases there, on the grid `1e-8 … 1e-4`.
pub(crate) fn check_blow_up(name: &str, g: &Nonlinearity) -> ConditionCheck {
    let grid = log_grid(-8, -4, 10);
    let values: Vec<f64> = grid.iter().map(|&t| g.eval(t)).collect();
    let monotone = values.windows(2).all(|w| w[0] > w[1]);
    let top = values[0];
    let last = *values.last().unwrap();
    let passed = monotone && top.is_finite() && top > 0.0 && top >= 10.0 * last.max(1.0);
    ConditionCheck::new(
        name,
        passed,
        format!("g(1e-8) = {top:e}, g(1e-4) = {last:e}, decreasing: {monotone}"),
    )
}

fn sup_of(e: &PeriodicFunction) -> f64 {
    e.max_value()
}

/// `∫_τ^1 g` on graded panels.
fn integral_to_one(g: &Nonlinearity, tau: f64) -> Result<f64> {
    let levels = (1.0 / tau).log2().ceil() as usize;
    let mut panels: Vec<(f64, f64)> =
        quad::geometric_panels(1.0, levels).into_iter().filter(|&(lo, _)| lo >= tau).collect();
    let last = panels.last().map_or(1.0, |p| p.0);
    if last > tau {
        panels.push((tau, last));
    }
    let mut f = |t: f64| g.eval(t);
    Ok(quad::over_panels(&mut f, &panels, 1e-10, 40)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractiveProblem {
    pub f: Nonlinearity,
    pub g: Nonlinearity,
    pub e: PeriodicFunction,
    pub s: FracOrder,
}

/// `Σ c_k (x + shift)^{p_k}` expanded for non-negative integer powers.
fn shift_polynomial(f: &Nonlinearity, shift: f64) -> Result<Nonlinearity> {
    let mut coeffs: Vec<f64> = Vec::new();
    for term in &f.terms {
        if term.power < 0.0 || term.power.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cannot shift the non-polynomial term {}·t^{}",
                term.coef, term.power
            )));
        }
        let p = term.power as usize;
        if coeffs.len() <= p {
            coeffs.resize(p + 1, 0.0);
        }
        let mut binom = 1.0;
        for k in 0..=p {
            coeffs[k] += term.coef * binom * shift.powi((p - k) as i32);
            binom = binom * (p - k) as f64 / (k + 1) as f64;
        }
    }
    Nonlinearity::new(
        coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0.0)
            .map(|(k, c)| PowerTerm::new(c, k as f64))
            .collect(),
    )
}

impl AttractiveProblem {
    /// `(Δ)^s v + f(v) v′ + v/(v − C) = e` rewritten for `u = v − C`:
    /// `(Δ)^s u + f(C + u) u′ + C/u = e − 1`.
    pub fn forbat(c: f64, f: &Nonlinearity, e: &PeriodicFunction, s: FracOrder) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("Forbat constant C = {c} must be positive")));
        }
        Ok(Self {
            f: shift_polynomial(f, c)?,
            g: Nonlinearity::from_pairs(&[(c, -1.0)]),
            e: e.with_mean(e.mean() - 1.0),
            s,
        })
    }

    /// Numerical checks of `g → +∞` at `0⁺` and `limsup g < ē`.
    pub fn check_conditions(&self) -> Vec<ConditionCheck> {
        let e_bar = self.e.mean();
        let far: Vec<f64> = log_grid(5, 6, 10).iter().map(|&t| self.g.eval(t)).collect();
        let far_max = far.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        vec![
            ConditionCheck::new("order", self.s.is_standard(), format!("s = {}", self.s.value())),
            check_blow_up("g blows up at 0+", &self.g),
            ConditionCheck::new(
                "limsup g < mean(e)",
                far_max < e_bar,
                format!("max g on [1e5, 1e6] = {far_max:e}, mean(e) = {e_bar:e}"),
            ),
        ]
    }

    pub fn validate(&self) -> Result<Vec<ConditionCheck>> {
        require(self.check_conditions())
    }
}

/// Ordered pair for the attractive problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSuper {
    /// Constant subsolution with `g(η) ≥ sup e`.
    pub eta: f64,
    /// Supersolution `C + v`.
    pub beta: PeriodicFunction,
    /// Smallest grid point beyond which `g ≤ ē`.
    pub r_threshold: f64,
    pub level: f64,
}

/// Largest `t` (to relative `1e-13`) with `pred` true on all of `(lo, t]`,
/// given `pred(lo)` and `!pred(hi)`.
fn bisect_log(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while hi / lo - 1.0 > 1e-13 {
        let mid = (lo * hi).sqrt();
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Constant subsolution `η` and supersolution `β = C + v` with `η ≤ β`.
pub fn find_sub_super(p: &AttractiveProblem, cfg: &IterationConfig) -> Result<SubSuper> {
    let sup_e = sup_of(&p.e);
    let e_bar = p.e.mean();
    let g = &p.g;
    let ok_eta = |t: f64| g.eval(t) >= sup_e;
    let start = 1e-12;
    if !ok_eta(start) {
        return Err(Error::ConditionViolation(format!(
            "no eta: g({start:e}) = {:e} < sup e = {sup_e:e}",
            g.eval(start)
        )));
    }
    let grid = log_grid(-12, 12, 20);
    let eta = match grid.iter().position(|&t| !ok_eta(t)) {
        None => grid[grid.len() - 1],
        Some(0) => start,
        Some(i) => bisect_log(grid[i - 1], grid[i], ok_eta),
    };

    let r_grid = log_grid(-8, 12, 20);
    if g.eval(*r_grid.last().unwrap()) > e_bar {
        return Err(Error::ConditionViolation(format!("g exceeds mean(e) = {e_bar:e} up to 1e12")));
    }
    let r_threshold = match r_grid.iter().rposition(|&t| g.eval(t) > e_bar) {
        None => r_grid[0],
        Some(i) => r_grid[i + 1],
    };

    let target = eta.max(r_threshold);
    let w = p.e.without_mean();
    let mut level = target;
    for _ in 0..50 {
        let lp = LienardProblem { f: p.f.clone(), w: w.clone(), s: p.s, mean_level: level };
        let v = solve_lienard(&lp, cfg)?.mean_zero_part(0);
        let low = level + v.min_value();
        if low >= target {
            return Ok(SubSuper { eta, beta: v.with_mean(level), r_threshold, level });
        }
        level = target - v.min_value() + 1e-12 * (1.0 + target.abs());
    }
    Err(Error::NonConvergence { iterations: 50, residual: f64::NAN })
}

/// Samples of the clamped right-hand side `H(u, u′)`.
struct Truncation<'a> {
    p: &'a AttractiveProblem,
    eta: f64,
    beta: Vec<f64>,
    beta_prime: Vec<f64>,
    e: Vec<f64>,
    m: usize,
    n_modes: usize,
}

impl Truncation<'_> {
    fn apply(&self, u: &PeriodicFunction) -> Result<PeriodicFunction> {
        let uv = u.synthesize(self.m)?;
        let du = u.derivative().synthesize(self.m)?;
        let (f, g) = (&self.p.f, &self.p.g);
        let h: Vec<f64> = (0..self.m)
            .map(|j| {
                let (b, e) = (self.beta[j], self.e[j]);
                if uv[j] > b {
                    -b + e - f.eval(b) * self.beta_prime[j] - g.eval(b)
                } else if uv[j] < self.eta {
                    -self.eta + e - g.eval(self.eta)
                } else {
                    -uv[j] + e - f.eval(uv[j]) * du[j] - g.eval(uv[j])
                }
            })
            .collect();
        PeriodicFunction::analyze(&h, self.n_modes)
    }
}

/// Largest excursion of `u` outside `[η, β]` on the monitor grid.
fn bracket_excess(u: &PeriodicFunction, eta: f64, beta: &PeriodicFunction) -> f64 {
    let us = u.fine_samples();
    let bs = beta.resized(u.n_modes()).fine_samples();
    us.iter().zip(&bs).map(|(&x, &b)| (eta - x).max(x - b).max(0.0)).fold(0.0, f64::max)
}

/// Slack on the bracket `η ≤ u ≤ β`.
pub const ORDERING_SLACK: f64 = 1e-9;

/// Attractive solve: truncated fixed-point iteration
/// `u ← −(A_s + I)^{-1} P_N[H(u, u′)]` from `β`, then Newton on the equation.
pub fn solve_attractive(p: &AttractiveProblem, cfg: &IterationConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let conditions = p.validate()?;
    let ss = find_sub_super(p, cfg)?;
    let n_modes = p.e.n_modes();
    let m = DEFAULT_REFINEMENT * min_grid(n_modes);
    let beta = ss.beta.resized(n_modes);
    let tr = Truncation {
        p,
        eta: ss.eta,
        beta: beta.synthesize(m)?,
        beta_prime: beta.derivative().synthesize(m)?,
        e: p.e.synthesize(m)?,
        m,
        n_modes,
    };

    let mut u = beta.clone();
    let mut violations = 0;
    let mut history = Vec::new();
    let switch = (1e3 * cfg.residual_tol).max(1e-6);
    for _ in 0..cfg.max_iterations {
        let image = solve_linear(&tr.apply(&u)?, p.s, 1.0, 0.0)?.scale(-1.0);
        if bracket_excess(&image, ss.eta, &beta) > ORDERING_SLACK {
            violations += 1;
        }
        let next = &u.scale(1.0 - cfg.damping) + &image.scale(cfg.damping);
        let step = (&next - &u).coeff_norm();
        history.push(step);
        u = next;
        if step <= switch {
            break;
        }
    }
    let picard_steps = history.len();

    let sys = Semilinear {
        drift: if p.f.is_zero() { None } else { Some(p.f.clone()) },
        ..Semilinear::new(p.s, -1.0, p.g.clone(), p.e.clone())
    };
    let out = iterate::solve(&sys, Layout::Full.pack(&u), cfg)?;
    let u = Layout::Full.unpack(&out.x)?;
    let excess = bracket_excess(&u, ss.eta, &beta);
    if excess > ORDERING_SLACK {
        return Err(Error::OrderingViolation(format!("solution leaves [eta, beta] by {excess:e}")));
    }
    let fine = 2 * m;
    let mean_g = grid_nodes(fine).iter().map(|&t| p.g.eval(u.eval(t))).sum::<f64>() / fine as f64;
    let du = u.derivative();
    let drift_neutrality = (2.0 * PI / fine as f64)
        * grid_nodes(fine)
            .iter()
            .map(|&t| {
                let v = u.eval(t);
                p.f.eval(v) * du.eval(t) * v
            })
            .sum::<f64>();

    let mut residual_history = history;
    residual_history.extend(out.history.iter().copied());
    Ok(SolveReport {
        problem_echo: serde_json::to_value(p).unwrap_or_default(),
        converged: true,
        iterations: picard_steps + out.iterations(),
        newton_steps: out.newton_steps,
        picard_steps: picard_steps + out.picard_steps,
        residual: out.residual,
        verified_residual: sys.pointwise_residual(&u, fine),
        residual_history,
        checks: Checks {
            mean_identity: Some((mean_g - p.e.mean()).abs()),
            drift_neutrality: Some(drift_neutrality.abs()),
            high_mode_fraction: u.high_mode_fraction(),
            min_value: u.min_value(),
            max_value: u.max_value(),
            ordering_violations: Some(violations),
            ordering_excess: Some(excess),
        },
        mean_levels: vec![u.mean()],
        solution: vec![u],
        bounds: None,
        continuation: Vec::new(),
        notes: vec![
            format!("eta = {}, beta = {} + v, R threshold = {}", ss.eta, ss.level, ss.r_threshold),
            format!(
                "hypotheses checked numerically on finite grids: {}",
                conditions.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")
            ),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepulsiveProblem {
    pub c: f64,
    pub g: Nonlinearity,
    pub e: PeriodicFunction,
    pub s: FracOrder,
    /// `g(t) ≥ −g4_a t − g4_b`.
    pub g4_a: f64,
    pub g4_b: f64,
    pub g3_epsilon: f64,
    /// Orientation of the operator term.
    #[serde(default)]
    pub operator_sign: OperatorSign,
}

impl RepulsiveProblem {
    pub fn check_conditions(&self) -> Vec<ConditionCheck> {
        let e_bar = self.e.mean();
        let g = &self.g;
        let far = log_grid(5, 6, 10);
        let g1_max = far.iter().map(|&t| g.eval(t) + e_bar).fold(f64::NEG_INFINITY, f64::max);

        let taus = log_grid(-8, -2, 2);
        let exponent = 2.0 * self.s.value() - 2.0 - self.g3_epsilon;
        let g3: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                let gt = g.eval(tau);
                match integral_to_one(g, tau) {
                    Ok(int) if gt > 0.0 => gt.powf(exponent) * int,
                    _ => f64::NAN,
                }
            })
            .collect();
        // increasing as τ decreases
        let g3_ok = g3.iter().all(|v| v.is_finite()) && g3.windows(2).all(|w| w[0] > w[1]);

        let lin = log_grid(-8, 6, 10);
        let g4_worst =
            lin.iter().map(|&t| g.eval(t) + self.g4_a * t + self.g4_b).fold(f64::INFINITY, f64::min);

        vec![
            ConditionCheck::new("order", self.s.is_standard(), format!("s = {}", self.s.value())),
            ConditionCheck::new("c > 0", self.c > 0.0, format!("c = {}", self.c)),
            ConditionCheck::new("mean(e) > 0", e_bar > 0.0, format!("mean(e) = {e_bar:e}")),
            ConditionCheck::new("G1", g1_max < 0.0, format!("max of g + mean(e) on [1e5, 1e6] = {g1_max:e}")),
            check_blow_up("G2", g),
            ConditionCheck::new(
                "G3",
                g3_ok,
                format!("g^(2s-2-eps) * int_tau^1 g at tau = 1e-8..1e-2: {g3:?}"),
            ),
            ConditionCheck::new(
                "G4",
                self.g4_a > 0.0 && self.g4_b >= 0.0 && g4_worst >= 0.0,
                format!("min of g(t) + a t + b on [1e-8, 1e6] = {g4_worst:e}"),
            ),
        ]
    }

    pub fn validate(&self) -> Result<Vec<ConditionCheck>> {
        require(self.check_conditions())
    }

    /// Constant root of `g(a) + ē = 0`, the `λ = 0` solution.
    pub fn constant_root(&self) -> Result<f64> {
        let e_bar = self.e.mean();
        let h = |t: f64| self.g.eval(t) + e_bar;
        let grid = log_grid(-8, 6, 20);
        let bracket = *grid.last().unwrap();
        if !(h(grid[0]) > 0.0) {
            return Err(Error::NoConstantRoot { bracket });
        }
        match grid.iter().position(|&t| !(h(t) > 0.0)) {
            None => Err(Error::NoConstantRoot { bracket }),
            Some(i) => {
                let (mut lo, mut hi) = (grid[i - 1], grid[i]);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if h(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 4.0 * f64::EPSILON * hi {
                        break;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    /// Homotopy residual at `λ` as a [`Semilinear`] system.
    pub(crate) fn homotopy(&self, lambda: f64, n_modes: usize) -> Semilinear {
        let e = self.e.resized(n_modes);
        let forcing = &e.scale(lambda) + &PeriodicFunction::constant(n_modes, (1.0 - lambda) * e.mean());
        Semilinear {
            c: self.c,
            local_weight: lambda,
            mean_weight: 1.0 - lambda,
            ..Semilinear::new(self.s, self.operator_sign.factor(), self.g.scaled(-1.0), forcing)
        }
    }
}

/// Step control of the λ-continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub growth: f64,
    /// Largest accepted `‖u_new − u_old‖_{L²} / (1 + ‖u_old‖_{L²})`.
    pub max_jump: f64,
    /// Newton iterations allowed per corrector.
    pub corrector_iterations: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            min_step: 1e-6,
            max_step: 0.25,
            growth: 1.5,
            max_jump: 0.5,
            corrector_iterations: 25,
        }
    }
}

/// Repulsive solve with default continuation controls.
pub fn solve_repulsive(p: &RepulsiveProblem, cfg: &IterationConfig) -> Result<SolveReport> {
    solve_repulsive_with(p, cfg, &ContinuationConfig::default())
}

pub fn solve_repulsive_with(
    p: &RepulsiveProblem,
    cfg: &IterationConfig,
    cont: &ContinuationConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let conditions = p.validate()?;
    continue_repulsive(p, cfg, cont, &conditions)
}

/// The continuation itself, for callers that checked their own hypotheses.
pub(crate) fn continue_repulsive(
    p: &RepulsiveProblem,
    cfg: &IterationConfig,
    cont: &ContinuationConfig,
    conditions: &[ConditionCheck],
) -> Result<SolveReport> {
    let n_modes = p.e.n_modes();
    let a = p.constant_root()?;
    let mut u = PeriodicFunction::constant(n_modes, a);
    let corrector = IterationConfig { max_iterations: cont.corrector_iterations, newton: true, ..*cfg };

    let mut lambda = 0.0;
    let mut step = cont.initial_step;
    let mut path = vec![ContinuationStep {
        lambda: 0.0,
        residual: p.homotopy(0.0, n_modes).residual_function(&u)?.coeff_norm(),
        iterations: 0,
        min_value: a,
        jump: 0.0,
    }];
    let mut last = None;
    while lambda < 1.0 {
        let target = (lambda + step).min(1.0);
        let sys = p.homotopy(target, n_modes);
        let attempt = iterate::solve(&sys, Layout::Full.pack(&u), &corrector)
            .and_then(|out| Ok((Layout::Full.unpack(&out.x)?, out)));
        let accepted = match attempt {
            Ok((next, out)) => {
                let jump = (&next - &u).l2_norm() / (1.0 + u.l2_norm());
                let min = next.min_value();
                if min <= 0.0 {
                    return Err(Error::PositivityLoss { min, lambda: target });
                }
                if jump <= cont.max_jump {
                    Some((next, out, min, jump))
                } else {
                    None
                }
            }
            Err(e) => {
                log::debug!("corrector failed at lambda = {target}: {e}");
                None
            }
        };
        match accepted {
            Some((next, out, min, jump)) => {
                path.push(ContinuationStep {
                    lambda: target,
                    residual: out.residual,
                    iterations: out.iterations(),
                    min_value: min,
                    jump,
                });
                u = next;
                lambda = target;
                step = (step * cont.growth).min(cont.max_step);
                last = Some(out);
            }
            None => {
                step *= 0.5;
                if step < cont.min_step {
                    return Err(Error::ContinuationStall { lambda, step });
                }
            }
        }
    }
    let out = last.expect("at least one continuation step");
    let sys = p.homotopy(1.0, n_modes);
    let fine = 2 * sys.grid();
    let mean_g = grid_nodes(fine).iter().map(|&t| p.g.eval(u.eval(t))).sum::<f64>() / fine as f64;
    let bounds = bound_monitor(&u, p);

    Ok(SolveReport {
        problem_echo: serde_json::to_value(p).unwrap_or_default(),
        converged: true,
        iterations: path.iter().map(|s| s.iterations).sum(),
        newton_steps: out.newton_steps,
        picard_steps: out.picard_steps,
        residual: out.residual,
        verified_residual: sys.pointwise_residual(&u, fine),
        residual_history: out.history.clone(),
        checks: Checks {
            mean_identity: Some((mean_g + p.e.mean()).abs()),
            drift_neutrality: None,
            high_mode_fraction: u.high_mode_fraction(),
            min_value: u.min_value(),
            max_value: u.max_value(),
            ..Checks::default()
        },
        mean_levels: vec![u.mean()],
        solution: vec![u],
        bounds: Some(bounds),
        continuation: path,
        notes: vec![
            format!("constant root at lambda = 0: a = {a}"),
            format!(
                "operator orientation: {:?}; the model equation writes (Δ)^s while the λ-family \
                 is stated with (−Δ)^s",
                p.operator_sign
            ),
            format!(
                "hypotheses checked numerically on finite grids: {}",
                conditions.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")
            ),
        ],
    })
}

/// A-priori bound diagnostics for a candidate repulsive solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimates {
    /// Measured lower bound `min u`, recorded when it lies below `R0`.
    pub r: Option<f64>,
    /// Largest `a` with `g > 0` and `g + ē > 0` on `(0, a]`.
    pub r0: f64,
    /// Smallest `a` beyond which `g + ē < 0`.
    pub r1: f64,
    /// `R1 + sqrt(2π) ‖u′‖_{L²}`, an upper bound for `u`.
    pub upper: f64,
    pub uprime_l2: f64,
    /// `‖e‖_{L²} / c`.
    pub uprime_l2_bound: f64,
    /// Measured `∫_0^{2π} |g(u)|`.
    pub g_l1: f64,
    /// `4π (a max u + b)`.
    pub g_l1_bound: f64,
    pub max_above_r0: bool,
    pub min_below_r1: bool,
    pub max_below_upper: bool,
    pub uprime_within_bound: bool,
    pub g_l1_within_bound: bool,
}

/// Thresholds `R0`, `R1` and the measured a-priori quantities.
pub fn bound_monitor(u: &PeriodicFunction, p: &RepulsiveProblem) -> BoundEstimates {
    let e_bar = p.e.mean();
    let g = &p.g;
    let grid = log_grid(-8, 6, 20);

    let below = |t: f64| g.eval(t) > 0.0 && g.eval(t) + e_bar > 0.0;
    let r0 = match grid.iter().position(|&t| !below(t)) {
        None => *grid.last().unwrap(),
        Some(0) => 0.0,
        Some(i) => bisect_log(grid[i - 1], grid[i], below),
    };
    let above = |t: f64| g.eval(t) + e_bar < 0.0;
    let r1 = match grid.iter().rposition(|&t| !above(t)) {
        None => grid[0],
        Some(i) if i + 1 == grid.len() => f64::INFINITY,
        // smallest a with g + ē < 0 beyond it: bisect on the complement
        Some(i) => bisect_log(grid[i], grid[i + 1], |t| !above(t)),
    };

    let samples = u.fine_samples();
    let (min, max) =
        samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let du = u.derivative();
    let uprime_l2 = du.l2_norm();
    let uprime_l2_bound = p.e.l2_norm() / p.c;
    let upper = r1 + (2.0 * PI).sqrt() * uprime_l2;
    let m = SUP_REFINEMENT * min_grid(u.n_modes());
    let g_l1 = if min > 0.0 {
        2.0 * PI * samples.iter().map(|&v| g.eval(v).abs()).sum::<f64>() / m as f64
    } else {
        f64::INFINITY
    };
    let g_l1_bound = 4.0 * PI * (p.g4_a * max + p.g4_b);
    BoundEstimates {
        r: (min < r0).then_some(min),
        r0,
        r1,
        upper,
        uprime_l2,
        uprime_l2_bound,
        g_l1,
        g_l1_bound,
        max_above_r0: max > r0,
        min_below_r1: min < r1,
        max_below_upper: max <= upper,
        uprime_within_bound: uprime_l2 <= uprime_l2_bound,
        g_l1_within_bound: g_l1 <= g_l1_bound,
    }
}

/// `A_s u` evaluated on the monitor grid; exposed for diagnostics.
pub fn operator_samples(u: &PeriodicFunction, s: FracOrder) -> Vec<f64> {
    apply_spectral(u, s).fine_samples()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    fn inverse() -> Nonlinearity {
        Nonlinearity::from_pairs(&[(1.0, -1.0)])
    }

    #[test]
    fn eta_and_threshold_for_inverse_power() {
        let e = PeriodicFunction::from_modes(8, 1.0, &[(1, 0.5, 0.0)]).unwrap();
        let p = AttractiveProblem { f: Nonlinearity::zero(), g: inverse(), e, s: order(0.75) };
        let ss = find_sub_super(&p, &IterationConfig::default()).unwrap();
        assert!(ss.eta <= 2.0 / 3.0 && ss.eta > 2.0 / 3.0 - 1e-9, "{}", ss.eta);
        assert!((ss.r_threshold - 1.0).abs() < 1e-12);
        assert!(ss.beta.min_value() >= ss.eta.max(ss.r_threshold) - 1e-12);
    }

    #[test]
    fn constant_forcing_gives_constant_solution() {
        let p = AttractiveProblem {
            f: Nonlinearity::zero(),
            g: inverse(),
            e: PeriodicFunction::constant(8, 2.0),
            s: order(0.75),
        };
        let rep = solve_attractive(&p, &IterationConfig::default()).unwrap();
        assert!((rep.u() - &PeriodicFunction::constant(8, 0.5)).max_abs_coeff() < 1e-10);
    }

    #[test]
    fn constant_g_is_rejected() {
        let p = AttractiveProblem {
            f: Nonlinearity::zero(),
            g: Nonlinearity::constant(1.0),
            e: PeriodicFunction::constant(4, 1.0),
            s: order(0.75),
        };
        assert!(matches!(p.validate(), Err(Error::ConditionViolation(_))));
    }

    #[test]
    fn forbat_shift() {
        let f = Nonlinearity::from_pairs(&[(2.0, 2.0), (1.0, 0.0)]);
        let shifted = shift_polynomial(&f, 1.5).unwrap();
        for t in [-1.0, 0.0, 0.7] {
            assert!((shifted.eval(t) - f.eval(t + 1.5)).abs() < 1e-13);
        }
        assert!(shift_polynomial(&inverse(), 1.0).is_err());
    }

    fn repulsive() -> RepulsiveProblem {
        RepulsiveProblem {
            c: 1.0,
            g: Nonlinearity::from_pairs(&[(1.0, -2.0), (-1.0, 1.0)]),
            e: PeriodicFunction::from_modes(16, 1.0, &[(1, 0.3, 0.0)]).unwrap(),
            s: order(0.9),
            g4_a: 1.0,
            g4_b: 0.0,
            g3_epsilon: 0.05,
            operator_sign: OperatorSign::Laplacian,
        }
    }

    #[test]
    fn repulsive_constant_root_is_the_cubic_root() {
        let a = repulsive().constant_root().unwrap();
        assert!((a * a * a - a * a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repulsive_conditions_hold_for_the_quadratic_preset() {
        for c in repulsive().check_conditions() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn repulsive_rejects_nonpositive_mean() {
        let mut p = repulsive();
        p.e = p.e.with_mean(-0.5);
        assert!(p.validate().is_err());
    }

    #[test]
    fn bound_thresholds() {
        let p = repulsive();
        let b = bound_monitor(&PeriodicFunction::constant(4, 1.2), &p);
        assert!((b.r0 - 1.0).abs() < 1e-10, "{}", b.r0);
        assert!((b.r1 - 1.465_571_231_876_768).abs() < 1e-9, "{}", b.r1);
        assert!(b.max_above_r0 && b.min_below_r1);
    }

    #[test]
    fn homotopy_jacobian_is_consistent_at_lambda_zero() {
        let p = repulsive();
        let a = p.constant_root().unwrap();
        let sys = p.homotopy(0.0, 16);
        let r = sys.residual_function(&PeriodicFunction::constant(16, a)).unwrap();
        assert!(r.coeff_norm() < 1e-12);
    }
}
