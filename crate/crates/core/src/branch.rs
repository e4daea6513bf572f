//! Pseudo-arclength continuation in `μ` for
//! `(Δ)^s u + c u′ + μ u = G(u) + e`, whose positive solutions blow up as
//! `μ → 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_op::{FracOrder, OperatorSign};
use crate::iterate::{self, CoefficientSystem, IterationConfig, Layout};
use crate::nonlinearity::Nonlinearity;
use crate::semilinear::Semilinear;
use crate::singular::{
    check_blow_up, continue_repulsive, log_grid, require, ConditionCheck, ContinuationConfig,
    RepulsiveProblem,
};
use crate::trig::{grid_nodes, PeriodicFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationProblem {
    pub c: f64,
    #[serde(rename = "G")]
    pub big_g: Nonlinearity,
    pub e: PeriodicFunction,
    pub s: FracOrder,
    pub mu_range: (f64, f64),
    #[serde(default)]
    pub operator_sign: OperatorSign,
}

impl BifurcationProblem {
    pub fn check_conditions(&self) -> Vec<ConditionCheck> {
        let g = &self.big_g;
        let nonneg = log_grid(-8, 6, 10).iter().all(|&t| g.eval(t) >= 0.0);
        let far = log_grid(5, 6, 10).iter().map(|&t| g.eval(t).abs()).fold(0.0, f64::max);
        // Partial integrals over successive decades towards zero must not shrink.
        let decades: Vec<f64> = (2..=8)
            .map(|k| {
                let hi = 10f64.powi(-(k - 1));
                let mut f = |t: f64| g.eval(t);
                crate::quad::adaptive(&mut f, hi / 10.0, hi, 1e-10 * (1.0 + g.eval(hi / 10.0) * hi), 40)
                    .map_or(f64::NAN, |e| e.value)
            })
            .collect();
        let n = decades.len();
        let h4 = decades.iter().all(|v| v.is_finite() && *v > 0.0) && decades[n - 1] >= 0.9 * decades[n - 2];
        let (lo, hi) = self.mu_range;
        vec![
            ConditionCheck::new("order", self.s.is_standard(), format!("s = {}", self.s.value())),
            ConditionCheck::new("c > 0", self.c > 0.0, format!("c = {}", self.c)),
            ConditionCheck::new(
                "mu range",
                lo.is_finite() && hi.is_finite() && lo < hi && hi > 0.0,
                format!("({lo}, {hi})"),
            ),
            ConditionCheck::new("G >= 0", nonneg, "sampled on [1e-8, 1e6]".into()),
            check_blow_up("H1", g),
            ConditionCheck::new("H2", far < 1e-3, format!("max |G| on [1e5, 1e6] = {far:e}")),
            ConditionCheck::new("H3", self.e.mean() > 0.0, format!("mean(e) = {:e}", self.e.mean())),
            ConditionCheck::new("H4", h4, format!("integral of G over decades 1e-1..1e-8: {decades:?}")),
        ]
    }

    pub fn validate(&self) -> Result<Vec<ConditionCheck>> {
        require(self.check_conditions()).map_err(|e| Error::SeedFailure(e.to_string()))
    }

    /// The equation at fixed `μ` in the semilinear form.
    pub(crate) fn at(&self, mu: f64) -> Semilinear {
        Semilinear {
            c: self.c,
            gamma: mu,
            ..Semilinear::new(self.s, self.operator_sign.factor(), self.big_g.scaled(-1.0), self.e.clone())
        }
    }

    /// `|μ mean(u) − mean(G(u)) − ē|` on a grid twice the collocation size.
    pub fn mean_identity_residual(&self, u: &PeriodicFunction, mu: f64) -> f64 {
        let m = 2 * self.at(mu).grid();
        let mean_g = grid_nodes(m).iter().map(|&t| self.big_g.eval(u.eval(t))).sum::<f64>() / m as f64;
        (mu * u.mean() - mean_g - self.e.mean()).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub mu: f64,
    pub solution: PeriodicFunction,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub arclength: f64,
    /// `dμ/ds` changed sign between the previous point and this one.
    pub fold_flag: bool,
    pub mean_identity_residual: f64,
    pub residual: f64,
    /// Pointwise residual on a finer grid.
    pub verified_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BranchConfig {
    /// `μ` of the seed; the upper end of the range when absent.
    pub seed_mu: Option<f64>,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub growth: f64,
    pub sup_cap: f64,
    pub arclength_budget: f64,
    pub max_points: usize,
    pub corrector_iterations: usize,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            seed_mu: None,
            initial_step: 0.05,
            min_step: 1e-9,
            max_step: 20.0,
            growth: 1.5,
            sup_cap: 1e3,
            arclength_budget: 1e5,
            max_points: 4000,
            corrector_iterations: 12,
        }
    }
}

/// A traced branch ordered from the large-norm end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub problem: BifurcationProblem,
    pub points: Vec<BranchPoint>,
    /// Why each of the two directions stopped.
    pub termination: Vec<String>,
    /// Sign of `μ` where [`solutions_at`] can find two solutions, if anywhere.
    pub two_solution_mu_sign: Option<f64>,
}

/// Weighted inner product: `μ` carries weight `w²`.
fn wdot(a: &DVector<f64>, b: &DVector<f64>, w: f64) -> f64 {
    let n = a.len() - 1;
    a.rows(0, n).dot(&b.rows(0, n)) + w * w * a[n] * b[n]
}

struct Tracer<'a> {
    p: &'a BifurcationProblem,
    cfg: &'a IterationConfig,
    bc: &'a BranchConfig,
}

impl Tracer<'_> {
    fn dim(&self) -> usize {
        Layout::Full.len(self.p.e.n_modes())
    }

    fn split(&self, y: &DVector<f64>) -> Result<(PeriodicFunction, f64)> {
        let n = self.dim();
        Ok((Layout::Full.unpack(y.rows(0, n).as_slice())?, y[n]))
    }

    /// `[J_u | ∂R/∂μ]` and `R` at `y`.
    fn linearize(&self, y: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let n = self.dim();
        let (u, mu) = self.split(y)?;
        let sys = self.p.at(mu);
        let x = Layout::Full.pack(&u);
        let r = DVector::from_vec(sys.residual(&x)?);
        let mut j = DMatrix::zeros(n, n + 1);
        j.view_mut((0, 0), (n, n)).copy_from(&sys.jacobian(&x)?);
        j.view_mut((0, n), (n, 1)).copy_from(&DVector::from_vec(x));
        Ok((j, r))
    }

    /// Unit tangent with positive projection on `prev`.
    fn tangent(&self, y: &DVector<f64>, prev: &DVector<f64>, w: f64) -> Result<DVector<f64>> {
        let n = self.dim();
        let (j, _) = self.linearize(y)?;
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n + 1)).copy_from(&j);
        for k in 0..=n {
            a[(n, k)] = prev[k] * if k == n { w * w } else { 1.0 };
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        let t = a.lu().solve(&rhs).ok_or_else(|| Error::StallAtFold { mu: y[n], step: 0.0 })?;
        let norm = wdot(&t, &t, w).sqrt();
        Ok(t / norm)
    }

    /// Newton on `R(y) = 0`, `⟨t, y − y_p⟩_w = 0`.
    fn correct(&self, yp: &DVector<f64>, t: &DVector<f64>, w: f64) -> Option<(DVector<f64>, f64)> {
        let n = self.dim();
        let mut y = yp.clone();
        for _ in 0..self.bc.corrector_iterations {
            let (j, r) = self.linearize(&y).ok()?;
            let rnorm = r.norm();
            if rnorm <= self.cfg.residual_tol {
                return Some((y, rnorm));
            }
            let mut a = DMatrix::zeros(n + 1, n + 1);
            a.view_mut((0, 0), (n, n + 1)).copy_from(&j);
            let mut rhs = DVector::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&(-r));
            for k in 0..=n {
                a[(n, k)] = t[k] * if k == n { w * w } else { 1.0 };
            }
            rhs[n] = -wdot(t, &(&y - yp), w);
            let dy = a.lu().solve(&rhs)?;
            y += dy;
            let (u, _) = self.split(&y).ok()?;
            if !(u.min_value() > 0.0) {
                return None;
            }
        }
        let (_, r) = self.linearize(&y).ok()?;
        let rnorm = r.norm();
        (rnorm <= self.cfg.residual_tol).then_some((y, rnorm))
    }

    fn point(&self, y: &DVector<f64>, residual: f64, fold: bool) -> Result<BranchPoint> {
        let (u, mu) = self.split(y)?;
        let sys = self.p.at(mu);
        Ok(BranchPoint {
            mu,
            sup_norm: u.sup_norm(),
            l2_norm: u.l2_norm(),
            arclength: 0.0,
            fold_flag: fold,
            mean_identity_residual: self.p.mean_identity_residual(&u, mu),
            residual,
            verified_residual: sys.pointwise_residual(&u, 2 * sys.grid()),
            solution: u,
        })
    }

    /// Continues from `y0` along `t0`; returns the points after the seed.
    fn walk(&self, y0: &DVector<f64>, t0: DVector<f64>) -> Result<(Vec<BranchPoint>, String)> {
        let n = self.dim();
        let (lo, hi) = self.p.mu_range;
        let mut y = y0.clone();
        let mut t = t0;
        let mut h = self.bc.initial_step;
        let mut arclength = 0.0;
        let mut points = Vec::new();
        loop {
            if points.len() >= self.bc.max_points {
                return Ok((points, "point budget".into()));
            }
            let (u, mu) = self.split(&y)?;
            let w = 1.0 + u.sup_norm();
            let yp = &y + &t * h;
            match self.correct(&yp, &t, w) {
                Some((y_new, rnorm)) => {
                    let t_new = self.tangent(&y_new, &t, w)?;
                    let fold = t_new[n].signum() != t[n].signum() && t[n] != 0.0;
                    let diff = &y_new - &y;
                    arclength += wdot(&diff, &diff, w).sqrt();
                    let pt = self.point(&y_new, rnorm, fold)?;
                    let mu_new = pt.mu;
                    let sup = pt.sup_norm;
                    points.push(pt);
                    y = y_new;
                    t = t_new;
                    h = (h * self.bc.growth).min(self.bc.max_step);
                    if mu_new < lo || mu_new > hi {
                        return Ok((points, format!("left mu range at mu = {mu_new}")));
                    }
                    if sup > self.bc.sup_cap {
                        return Ok((points, format!("sup norm cap reached at mu = {mu_new}")));
                    }
                    if arclength > self.bc.arclength_budget {
                        return Ok((points, "arclength budget".into()));
                    }
                }
                None => {
                    h *= 0.5;
                    if h < self.bc.min_step {
                        log::warn!("step underflow at mu = {mu} after {} points", points.len());
                        return Err(Error::StallAtFold { mu, step: h });
                    }
                }
            }
        }
    }
}

/// Seeds with the repulsive solver on `g = G − μ t` and traces both
/// directions.
pub fn trace_branch(p: &BifurcationProblem, cfg: &IterationConfig, bc: &BranchConfig) -> Result<Branch> {
    cfg.validate()?;
    p.validate()?;
    let seed_mu = bc.seed_mu.unwrap_or(p.mu_range.1);
    if !(seed_mu > 0.0) {
        return Err(Error::SeedFailure(format!("seed mu = {seed_mu} must be positive")));
    }
    let rp = RepulsiveProblem {
        c: p.c,
        g: p.big_g.plus_linear(-seed_mu),
        e: p.e.clone(),
        s: p.s,
        g4_a: seed_mu,
        g4_b: 0.0,
        g3_epsilon: 0.05,
        operator_sign: p.operator_sign,
    };
    // The reduction to the repulsive problem needs only the blow-up at zero,
    // the sign at infinity and the divergent integral, all covered above.
    let seed = continue_repulsive(&rp, cfg, &ContinuationConfig::default(), &p.check_conditions())
        .map_err(|e| Error::SeedFailure(e.to_string()))?;

    let tracer = Tracer { p, cfg, bc };
    let n = tracer.dim();
    let mut y0 = DVector::zeros(n + 1);
    y0.rows_mut(0, n).copy_from(&DVector::from_vec(Layout::Full.pack(seed.u())));
    y0[n] = seed_mu;
    let w = 1.0 + seed.u().sup_norm();
    // Orientation towards decreasing μ, i.e. the large-norm end.
    let mut down = DVector::zeros(n + 1);
    down[n] = -1.0;
    let t_down = tracer.tangent(&y0, &down, w)?;
    let seed_point = tracer.point(&y0, seed.residual, false)?;

    let (towards_large, why_large) = tracer.walk(&y0, t_down.clone())?;
    let (away, why_away) = tracer.walk(&y0, -t_down)?;

    let mut points: Vec<BranchPoint> = towards_large.into_iter().rev().collect();
    points.push(seed_point);
    points.extend(away);
    let mut s = 0.0;
    for k in 0..points.len() {
        if k > 0 {
            let d = &points[k].solution - &points[k - 1].solution;
            let wk = 1.0 + points[k - 1].sup_norm;
            let dmu = points[k].mu - points[k - 1].mu;
            s += (d.coeff_norm().powi(2) + wk * wk * dmu * dmu).sqrt();
        }
        points[k].arclength = s;
    }
    let mut branch = Branch {
        problem: p.clone(),
        points,
        termination: vec![format!("towards large norm: {why_large}"), format!("away: {why_away}")],
        two_solution_mu_sign: None,
    };
    branch.two_solution_mu_sign = fold_mus(&branch).first().map(|m| m.signum());
    Ok(branch)
}

/// `μ` values of flagged folds.
pub fn fold_mus(branch: &Branch) -> Vec<f64> {
    branch.points.iter().filter(|p| p.fold_flag).map(|p| p.mu).collect()
}

/// All distinct solutions at `mu`, from each branch segment that crosses it,
/// refined by Newton at fixed `mu`.
pub fn solutions_at(branch: &Branch, mu: f64, cfg: &IterationConfig) -> Vec<PeriodicFunction> {
    let p = &branch.problem;
    let sys = p.at(mu);
    let mut found: Vec<PeriodicFunction> = Vec::new();
    for pair in branch.points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (lo, hi) = if a.mu <= b.mu { (a.mu, b.mu) } else { (b.mu, a.mu) };
        if mu < lo || mu > hi {
            continue;
        }
        let theta = if hi > lo { (mu - a.mu) / (b.mu - a.mu) } else { 0.0 };
        let guess = &a.solution.scale(1.0 - theta) + &b.solution.scale(theta);
        let Ok(out) = iterate::solve(&sys, Layout::Full.pack(&guess), cfg) else {
            continue;
        };
        let Ok(u) = Layout::Full.unpack(&out.x) else {
            continue;
        };
        if !(u.min_value() > 0.0) {
            continue;
        }
        let distinct = found.iter().all(|v| v.l2_distance(&u) > 1e-6 * (1.0 + v.l2_norm()));
        if distinct {
            found.push(u);
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem() -> BifurcationProblem {
        BifurcationProblem {
            c: 1.0,
            big_g: Nonlinearity::from_pairs(&[(1.0, -1.0)]),
            e: PeriodicFunction::from_modes(8, 1.0, &[(1, 0.2, 0.0)]).unwrap(),
            s: FracOrder::new(0.75).unwrap(),
            mu_range: (0.01, 2.0),
            operator_sign: OperatorSign::Laplacian,
        }
    }

    #[test]
    fn conditions_hold_for_inverse_power() {
        for c in problem().check_conditions() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn integrable_singularity_fails_h4() {
        let mut p = problem();
        p.big_g = Nonlinearity::from_pairs(&[(1.0, -0.5)]);
        let checks = p.check_conditions();
        assert!(!checks.iter().find(|c| c.name == "H4").unwrap().passed);
    }

    #[test]
    fn zero_g_is_a_seed_failure() {
        let mut p = problem();
        p.big_g = Nonlinearity::zero();
        let err = trace_branch(&p, &IterationConfig::default(), &BranchConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SeedFailure(_)), "{err}");
    }

    #[test]
    fn constant_forcing_branch_is_explicit() {
        // u ≡ a with μ a = 1/a + 1, so a = (1 + sqrt(1 + 4μ)) / (2μ).
        let mut p = problem();
        p.e = PeriodicFunction::constant(4, 1.0);
        p.mu_range = (0.05, 1.0);
        let branch = trace_branch(&p, &IterationConfig::default(), &BranchConfig::default()).unwrap();
        assert!(branch.points.len() > 5);
        for pt in &branch.points {
            let a = (1.0 + (1.0 + 4.0 * pt.mu).sqrt()) / (2.0 * pt.mu);
            assert!((pt.solution.mean() - a).abs() < 1e-8 * a, "mu = {}", pt.mu);
            assert!(pt.mean_identity_residual < 1e-9);
        }
        assert!(branch.points.first().unwrap().sup_norm > branch.points.last().unwrap().sup_norm);
    }

    #[test]
    fn solutions_at_seed() {
        let mut p = problem();
        p.mu_range = (0.2, 1.0);
        let cfg = IterationConfig::default();
        let branch = trace_branch(&p, &cfg, &BranchConfig::default()).unwrap();
        let sols = solutions_at(&branch, 1.0, &cfg);
        assert_eq!(sols.len(), 1);
        assert!(solutions_at(&branch, 50.0, &cfg).is_empty());
    }
}
