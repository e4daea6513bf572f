//! Residual and Jacobian of the scalar semilinear family
//!
//! `σ A_s u + γ u + c u′ + f(u) u′ + λ_l φ(u) + λ_m mean(φ(u)) = r`,
//!
//! which covers the attractive, repulsive (with its homotopy) and
//! bifurcation equations.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::frac_op::{apply_spectral, FracOrder};
use crate::iterate::{linear_block, multiplier_block, CoefficientSystem, Layout};
use crate::nonlinearity::Nonlinearity;
use crate::trig::{grid_nodes, min_grid, PeriodicFunction, DEFAULT_REFINEMENT};

#[derive(Debug, Clone)]
pub(crate) struct Semilinear {
    pub s: FracOrder,
    pub sigma: f64,
    pub gamma: f64,
    pub c: f64,
    pub drift: Option<Nonlinearity>,
    pub phi: Nonlinearity,
    pub local_weight: f64,
    pub mean_weight: f64,
    pub forcing: PeriodicFunction,
    pub n_modes: usize,
    /// Reject trial points whose minimum drops below this share of the
    /// current minimum.
    pub positivity_ratio: Option<f64>,
}

impl Semilinear {
    pub fn new(s: FracOrder, sigma: f64, phi: Nonlinearity, forcing: PeriodicFunction) -> Self {
        let n_modes = forcing.n_modes();
        Self {
            s,
            sigma,
            gamma: 0.0,
            c: 0.0,
            drift: None,
            positivity_ratio: if phi.requires_positive() { Some(0.1) } else { None },
            phi,
            local_weight: 1.0,
            mean_weight: 0.0,
            forcing,
            n_modes,
        }
    }

    pub fn grid(&self) -> usize {
        DEFAULT_REFINEMENT * min_grid(self.n_modes)
    }

    fn check_domain(&self, values: &[f64]) -> Result<()> {
        let needs_positive =
            self.phi.requires_positive() || self.drift.as_ref().is_some_and(|f| f.requires_positive());
        if needs_positive {
            if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(Error::DomainViolation(format!(
                    "u = {v:e} ≤ 0 at t = {:.6}",
                    2.0 * PI * j as f64 / values.len() as f64
                )));
            }
        }
        Ok(())
    }

    /// Samples of `u`, `u′` on the collocation grid.
    fn samples(&self, u: &PeriodicFunction) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = self.grid();
        let vals = u.synthesize(m)?;
        self.check_domain(&vals)?;
        let ders = if self.drift.is_some() { u.derivative().synthesize(m)? } else { Vec::new() };
        Ok((vals, ders))
    }

    pub fn residual_function(&self, u: &PeriodicFunction) -> Result<PeriodicFunction> {
        let (vals, ders) = self.samples(u)?;
        let nonlinear: Vec<f64> = vals
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let mut acc = self.local_weight * self.phi.eval(v);
                if let Some(f) = &self.drift {
                    acc += f.eval(v) * ders[j];
                }
                acc
            })
            .collect();
        let mut nl = PeriodicFunction::analyze(&nonlinear, self.n_modes)?;
        if self.mean_weight != 0.0 {
            let mean_phi = vals.iter().map(|&v| self.phi.eval(v)).sum::<f64>() / vals.len() as f64;
            nl = nl.with_mean(nl.mean() + self.mean_weight * mean_phi);
        }
        let lin = &(&apply_spectral(u, self.s).scale(self.sigma) + &u.scale(self.gamma))
            + &u.derivative().scale(self.c);
        Ok(&(&lin + &nl) - &self.forcing)
    }

    pub fn jacobian_at(&self, u: &PeriodicFunction) -> Result<DMatrix<f64>> {
        let (vals, ders) = self.samples(u)?;
        let dphi = self.phi.derivative();
        let dphi_vals: Vec<f64> = vals.iter().map(|&v| dphi.eval(v)).collect();
        let mut p: Vec<f64> = dphi_vals.iter().map(|d| self.local_weight * d).collect();
        let mut q = None;
        if let Some(f) = &self.drift {
            let df = f.derivative();
            for (j, &v) in vals.iter().enumerate() {
                p[j] += df.eval(v) * ders[j];
            }
            q = Some(vals.iter().map(|&v| f.eval(v)).collect::<Vec<f64>>());
        }
        let mut jac = linear_block(self.n_modes, Layout::Full, self.s, self.sigma, self.gamma, self.c);
        jac += multiplier_block(self.n_modes, Layout::Full, Some(&p), q.as_deref(), false)?;
        if self.mean_weight != 0.0 {
            // d mean(φ(u)) = mean(φ′(u) δ): the mean row of P_N[φ′(u) δ].
            let full = multiplier_block(self.n_modes, Layout::Full, Some(&dphi_vals), None, false)?;
            for col in 0..jac.ncols() {
                jac[(0, col)] += self.mean_weight * full[(0, col)];
            }
        }
        Ok(jac)
    }

    /// Pointwise residual on `m` nodes by direct summation; returns the
    /// coefficient-equivalent norm `sqrt(2·mean(r²))`.
    pub fn pointwise_residual(&self, u: &PeriodicFunction, m: usize) -> f64 {
        let au = apply_spectral(u, self.s);
        let du = u.derivative();
        let nodes = grid_nodes(m);
        let uv: Vec<f64> = nodes.iter().map(|&t| u.eval(t)).collect();
        let mean_phi = if self.mean_weight != 0.0 {
            uv.iter().map(|&v| self.phi.eval(v)).sum::<f64>() / m as f64
        } else {
            0.0
        };
        let sq: f64 = nodes
            .iter()
            .zip(&uv)
            .map(|(&t, &v)| {
                let d = du.eval(t);
                let mut r = self.sigma * au.eval(t)
                    + self.gamma * v
                    + self.c * d
                    + self.local_weight * self.phi.eval(v)
                    + self.mean_weight * mean_phi
                    - self.forcing.eval(t);
                if let Some(f) = &self.drift {
                    r += f.eval(v) * d;
                }
                r * r
            })
            .sum();
        (2.0 * sq / m as f64).sqrt()
    }
}

impl CoefficientSystem for Semilinear {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = Layout::Full.unpack(x)?;
        Ok(Layout::Full.pack(&self.residual_function(&u)?))
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.jacobian_at(&Layout::Full.unpack(x)?)
    }

    fn admissible(&self, from: &[f64], to: &[f64]) -> bool {
        match self.positivity_ratio {
            None => true,
            Some(ratio) => {
                let (Ok(a), Ok(b)) = (Layout::Full.unpack(from), Layout::Full.unpack(to)) else {
                    return false;
                };
                let floor = ratio * a.min_value().max(0.0);
                b.min_value() > floor
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn jacobian_matches_finite_differences() {
        let s = FracOrder::new(0.8).unwrap();
        let forcing = PeriodicFunction::from_modes(4, 1.0, &[(1, 0.3, 0.0)]).unwrap();
        let mut sys =
            Semilinear::new(s, -1.0, Nonlinearity::from_pairs(&[(1.0, -2.0), (-1.0, 1.0)]), forcing);
        sys.c = 0.7;
        sys.gamma = 0.2;
        sys.drift = Some(Nonlinearity::from_pairs(&[(0.5, 2.0)]));
        sys.local_weight = 0.6;
        sys.mean_weight = 0.4;
        let u = PeriodicFunction::from_modes(4, 1.5, &[(1, 0.2, -0.1), (3, 0.05, 0.02)]).unwrap();
        let x = Layout::Full.pack(&u);
        let jac = sys.jacobian(&x).unwrap();
        let h = 1e-6;
        for col in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[col] += h;
            xm[col] -= h;
            let rp = DVector::from_vec(sys.residual(&xp).unwrap());
            let rm = DVector::from_vec(sys.residual(&xm).unwrap());
            let fd = (rp - rm) / (2.0 * h);
            let err = (fd - jac.column(col)).amax();
            assert!(err < 1e-6, "column {col}: {err}");
        }
    }
}
