//! Shared nonlinear iteration: globalized Newton with a damped Picard fallback,
//! and builders for spectral Jacobians.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_op::FracOrder;
use crate::trig::PeriodicFunction;

/// Controls for the fixed-point and Newton iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterationConfig {
    /// Picard relaxation `θ` in `z ← (1−θ) z + θ T(z)`.
    pub damping: f64,
    /// Target for the coefficient-space l2 norm of the residual.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Homotopy parameter multiplying the nonlinear and forcing terms.
    pub continuation_lambda: f64,
    /// Try a Newton step before each Picard step.
    pub newton: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            residual_tol: 1e-10,
            max_iterations: 200,
            continuation_lambda: 1.0,
            newton: true,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!("damping {} outside (0, 1]", self.damping)));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "residual_tol {} must be positive",
                self.residual_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        if !(self.continuation_lambda > 0.0 && self.continuation_lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "continuation_lambda {} outside (0, 1]",
                self.continuation_lambda
            )));
        }
        Ok(())
    }
}

/// A square nonlinear system in coefficient space.
pub(crate) trait CoefficientSystem {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>>;
    /// The fixed-point map `T`; `None` when the problem has no Picard form.
    fn picard(&self, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
    /// Rejects a trial point, e.g. one that loses too much positivity.
    fn admissible(&self, _from: &[f64], _to: &[f64]) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub history: Vec<f64>,
    pub newton_steps: usize,
    pub picard_steps: usize,
}

impl Outcome {
    pub fn iterations(&self) -> usize {
        self.newton_steps + self.picard_steps
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

/// Maximum number of step halvings in the line searches.
const MAX_HALVINGS: usize = 30;

/// Trial point, its residual and the residual norm.
type Step = (Vec<f64>, Vec<f64>, f64);

fn newton_step<S: CoefficientSystem>(sys: &S, x: &[f64], r: &[f64], rnorm: f64) -> Option<Step> {
    let j = sys.jacobian(x).ok()?;
    let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
    let delta = j.lu().solve(&rhs)?;
    let mut alpha = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let trial = axpy(x, alpha, delta.as_slice());
        if sys.admissible(x, &trial) {
            if let Ok(rt) = sys.residual(&trial) {
                let n = norm(&rt);
                if n.is_finite() && n < (1.0 - 1e-4 * alpha) * rnorm {
                    return Some((trial, rt, n));
                }
            }
        }
        alpha *= 0.5;
    }
    None
}

fn picard_step<S: CoefficientSystem>(sys: &S, x: &[f64], theta: f64) -> Option<Result<Step>> {
    let target = match sys.picard(x)? {
        Ok(t) => t,
        Err(e) => return Some(Err(e)),
    };
    let dir: Vec<f64> = target.iter().zip(x).map(|(t, a)| t - a).collect();
    let mut alpha = theta;
    let mut last_err = None;
    for _ in 0..=MAX_HALVINGS {
        let trial = axpy(x, alpha, &dir);
        if sys.admissible(x, &trial) {
            match sys.residual(&trial) {
                Ok(rt) => {
                    let n = norm(&rt);
                    return Some(Ok((trial, rt, n)));
                }
                Err(e) => last_err = Some(e),
            }
        }
        alpha *= 0.5;
    }
    Some(Err(last_err.unwrap_or(Error::NonConvergence { iterations: 0, residual: f64::NAN })))
}

/// Iterates from `x0` until the residual norm is at most `cfg.residual_tol`.
pub(crate) fn solve<S: CoefficientSystem>(sys: &S, x0: Vec<f64>, cfg: &IterationConfig) -> Result<Outcome> {
    let mut x = x0;
    let mut r = sys.residual(&x)?;
    let mut rnorm = norm(&r);
    let mut out =
        Outcome { x: Vec::new(), residual: rnorm, history: vec![rnorm], newton_steps: 0, picard_steps: 0 };
    while rnorm > cfg.residual_tol {
        if out.iterations() >= cfg.max_iterations || !rnorm.is_finite() {
            return Err(Error::NonConvergence { iterations: out.iterations(), residual: rnorm });
        }
        let step = if cfg.newton {
            newton_step(sys, &x, &r, rnorm).inspect(|_| out.newton_steps += 1)
        } else {
            None
        };
        let (next, next_r, next_norm) = match step {
            Some(s) => s,
            None => match picard_step(sys, &x, cfg.damping) {
                Some(res) => {
                    out.picard_steps += 1;
                    res?
                }
                None => return Err(Error::NonConvergence { iterations: out.iterations(), residual: rnorm }),
            },
        };
        log::debug!("iteration {}: residual {next_norm:e}", out.iterations());
        x = next;
        r = next_r;
        rnorm = next_norm;
        out.history.push(rnorm);
    }
    out.x = x;
    out.residual = rnorm;
    Ok(out)
}

/// Coefficient layout of the unknowns: with or without the mean `a0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Layout {
    ZeroMean,
    Full,
}

impl Layout {
    pub fn len(self, n_modes: usize) -> usize {
        match self {
            Layout::ZeroMean => 2 * n_modes,
            Layout::Full => 2 * n_modes + 1,
        }
    }

    pub fn pack(self, f: &PeriodicFunction) -> Vec<f64> {
        match self {
            Layout::ZeroMean => f.to_vec_zero_mean(),
            Layout::Full => f.to_vec(),
        }
    }

    pub fn unpack(self, v: &[f64]) -> Result<PeriodicFunction> {
        match self {
            Layout::ZeroMean => PeriodicFunction::from_vec_zero_mean(v),
            Layout::Full => PeriodicFunction::from_vec(v),
        }
    }

    /// `(mode, sine)` of each unknown; mode 0 is the mean.
    fn unknowns(self, n_modes: usize) -> Vec<(usize, bool)> {
        let mut v = Vec::with_capacity(self.len(n_modes));
        if self == Layout::Full {
            v.push((0, false));
        }
        v.extend((1..=n_modes).map(|n| (n, false)));
        v.extend((1..=n_modes).map(|n| (n, true)));
        v
    }
}

/// Matrix of `δ ↦ factor·A_s δ + γ δ + c δ′` in the given layout.
pub(crate) fn linear_block(
    n_modes: usize,
    layout: Layout,
    s: FracOrder,
    factor: f64,
    gamma: f64,
    c: f64,
) -> DMatrix<f64> {
    let dim = layout.len(n_modes);
    let mut m = DMatrix::zeros(dim, dim);
    let offset = if layout == Layout::Full { 1 } else { 0 };
    if layout == Layout::Full {
        m[(0, 0)] = gamma;
    }
    for n in 1..=n_modes {
        let ia = offset + n - 1;
        let ib = offset + n_modes + n - 1;
        let diag = factor * s.multiplier(n) + gamma;
        let cn = c * n as f64;
        m[(ia, ia)] = diag;
        m[(ib, ib)] = diag;
        // (cos)′ = −n sin, (sin)′ = n cos
        m[(ib, ia)] = -cn;
        m[(ia, ib)] = cn;
    }
    m
}

/// Matrix of `δ ↦ P_N[p·δ + q·δ′]` (optionally differentiated afterwards),
/// with `p`, `q` sampled on `m` equispaced nodes.
pub(crate) fn multiplier_block(
    n_modes: usize,
    layout: Layout,
    values: Option<&[f64]>,
    derivative_values: Option<&[f64]>,
    differentiate: bool,
) -> Result<DMatrix<f64>> {
    let m = values.or(derivative_values).map_or(0, |v| v.len());
    let dim = layout.len(n_modes);
    let mut out = DMatrix::zeros(dim, dim);
    if m == 0 {
        return Ok(out);
    }
    let nodes = crate::trig::grid_nodes(m);
    let mut samples = vec![0.0; m];
    for (col, (n, sine)) in layout.unknowns(n_modes).into_iter().enumerate() {
        let nf = n as f64;
        for (j, &t) in nodes.iter().enumerate() {
            let (sn, cs) = (nf * t).sin_cos();
            let (d, dd) = if sine { (sn, nf * cs) } else { (cs, -nf * sn) };
            let mut v = 0.0;
            if let Some(p) = values {
                v += p[j] * d;
            }
            if let Some(q) = derivative_values {
                v += q[j] * dd;
            }
            samples[j] = v;
        }
        let mut image = PeriodicFunction::analyze(&samples, n_modes)?;
        if differentiate {
            image = image.derivative();
        }
        let packed = layout.pack(&image);
        out.column_mut(col).copy_from_slice(&packed);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_op::apply_spectral;
    use crate::trig::min_grid;

    #[test]
    fn linear_block_matches_operator() {
        let s = FracOrder::new(0.7).unwrap();
        let f = PeriodicFunction::from_modes(3, 0.5, &[(1, 1.0, -2.0), (3, 0.5, 0.25)]).unwrap();
        for layout in [Layout::Full, Layout::ZeroMean] {
            let m = linear_block(3, layout, s, -1.0, 0.4, 1.3);
            let x = DVector::from_vec(layout.pack(&f));
            let image = layout.unpack((m * x).as_slice()).unwrap();
            let direct = &(&apply_spectral(&f, s).scale(-1.0) + &f.scale(0.4)) + &f.derivative().scale(1.3);
            let direct = if layout == Layout::ZeroMean { direct.without_mean() } else { direct };
            assert!((&image - &direct).max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn multiplier_block_matches_grid_product() {
        let n = 4;
        let m = 3 * min_grid(n);
        let nodes = crate::trig::grid_nodes(m);
        let p: Vec<f64> = nodes.iter().map(|t| 1.0 + 0.5 * t.cos()).collect();
        let q: Vec<f64> = nodes.iter().map(|t| t.sin()).collect();
        let mat = multiplier_block(n, Layout::Full, Some(&p), Some(&q), false).unwrap();
        let f = PeriodicFunction::from_modes(n, 0.2, &[(1, 1.0, 0.0), (2, 0.0, 0.3)]).unwrap();
        let fs = f.synthesize(m).unwrap();
        let ds = f.derivative().synthesize(m).unwrap();
        let prod: Vec<f64> = (0..m).map(|j| p[j] * fs[j] + q[j] * ds[j]).collect();
        let expect = PeriodicFunction::analyze(&prod, n).unwrap();
        let got = mat * DVector::from_vec(f.to_vec());
        for (a, b) in got.iter().zip(expect.to_vec()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    struct Scalar;
    impl CoefficientSystem for Scalar {
        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] * x[0] - 2.0])
        }
        fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
            Ok(DMatrix::from_element(1, 1, 2.0 * x[0]))
        }
    }

    #[test]
    fn newton_converges_quadratically() {
        let cfg = IterationConfig { residual_tol: 1e-14, ..Default::default() };
        let out = solve(&Scalar, vec![1.0], &cfg).unwrap();
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!(out.iterations() <= 6);
    }

    #[test]
    fn config_validation() {
        assert!(IterationConfig { damping: 0.0, ..Default::default() }.validate().is_err());
        assert!(IterationConfig { residual_tol: -1.0, ..Default::default() }.validate().is_err());
        assert!(IterationConfig::default().validate().is_ok());
    }
}
