//! Real 2π-periodic functions stored as truncated trigonometric series.
//!
//! A [`PeriodicFunction`] holds `u(t) = a0 + Σ_{n=1}^{N} a_n cos(nt) + b_n sin(nt)`.
//! Grid values are obtained by FFT synthesis on `m ≥ 2N + 1` equispaced nodes
//! `t_j = 2πj/m`; at that size the discrete projections are exact for every
//! trigonometric polynomial of degree `≤ N`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// Oversampling factor for nonlinear compositions.
pub const DEFAULT_REFINEMENT: usize = 3;
/// Oversampling factor for sup-norm and min/max monitors.
pub const SUP_REFINEMENT: usize = 8;
pub const DEFAULT_N_MODES: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn fft_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Smallest admissible grid for `n_modes`.
pub fn min_grid(n_modes: usize) -> usize {
    2 * n_modes + 1
}

/// Equispaced nodes `2πj/m`.
pub fn grid_nodes(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicFunction {
    n_modes: usize,
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(skip)]
    grid_cache: Option<Vec<f64>>,
}

/// Norms and spectral energy of a periodic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    /// Grid estimate on an 8× oversampled grid; a lower bound for the true sup.
    pub sup: f64,
    pub mean: f64,
    /// `π Σ n^{2s} (a_n² + b_n²)`, the quadratic form of `(−Δ)^s`.
    pub hs_energy: f64,
}

impl PeriodicFunction {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidParameter(format!(
                "cosine and sine coefficient lengths differ ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if a.is_empty() {
            return Err(Error::InvalidParameter("n_modes must be positive".into()));
        }
        if !a0.is_finite() || a.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { n_modes: a.len(), a0, a, b, grid_cache: None })
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self::constant(n_modes, 0.0)
    }

    pub fn constant(n_modes: usize, value: f64) -> Self {
        assert!(n_modes > 0, "n_modes must be positive");
        Self { n_modes, a0: value, a: vec![0.0; n_modes], b: vec![0.0; n_modes], grid_cache: None }
    }

    /// Builds from a mean and `(n, a_n, b_n)` triples; repeated modes add up.
    pub fn from_modes(n_modes: usize, a0: f64, modes: &[(usize, f64, f64)]) -> Result<Self> {
        let mut f = Self::constant(n_modes.max(1), a0);
        for &(n, an, bn) in modes {
            if n == 0 || n > f.n_modes {
                return Err(Error::InvalidParameter(format!("mode {n} outside 1..={}", f.n_modes)));
            }
            f.a[n - 1] += an;
            f.b[n - 1] += bn;
        }
        Self::new(f.a0, f.a, f.b)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Cosine coefficients `a_1..a_N`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Sine coefficients `b_1..b_N`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `(a_n, b_n)` for `n ≥ 1`.
    pub fn mode(&self, n: usize) -> (f64, f64) {
        (self.a[n - 1], self.b[n - 1])
    }

    pub fn mean(&self) -> f64 {
        self.a0
    }

    pub fn grid_cache(&self) -> Option<&[f64]> {
        self.grid_cache.as_deref()
    }

    /// Returns a copy carrying synthesized samples on `m` nodes.
    pub fn with_grid_cache(mut self, m: usize) -> Result<Self> {
        let samples = self.synthesize(m)?;
        self.grid_cache = Some(samples);
        Ok(self)
    }

    /// Applies `map(n, a_n, b_n) -> (a_n', b_n')` to every mode and `map0` to the mean.
    pub fn map_modes(
        &self,
        map0: impl Fn(f64) -> f64,
        map: impl Fn(usize, f64, f64) -> (f64, f64),
    ) -> PeriodicFunction {
        let mut a = Vec::with_capacity(self.n_modes);
        let mut b = Vec::with_capacity(self.n_modes);
        for n in 1..=self.n_modes {
            let (an, bn) = map(n, self.a[n - 1], self.b[n - 1]);
            a.push(an);
            b.push(bn);
        }
        PeriodicFunction { n_modes: self.n_modes, a0: map0(self.a0), a, b, grid_cache: None }
    }

    /// Mean-zero part `u − mean(u)`.
    pub fn without_mean(&self) -> PeriodicFunction {
        self.map_modes(|_| 0.0, |_, a, b| (a, b))
    }

    pub fn with_mean(&self, a0: f64) -> PeriodicFunction {
        self.map_modes(|_| a0, |_, a, b| (a, b))
    }

    /// Truncates or zero-pads to `n_modes`.
    pub fn resized(&self, n_modes: usize) -> PeriodicFunction {
        let mut g = Self::constant(n_modes, self.a0);
        let k = n_modes.min(self.n_modes);
        g.a[..k].copy_from_slice(&self.a[..k]);
        g.b[..k].copy_from_slice(&self.b[..k]);
        g
    }

    /// Point evaluation by direct summation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut sum = self.a0;
        for n in 1..=self.n_modes {
            let (s, c) = (n as f64 * t).sin_cos();
            sum += self.a[n - 1] * c + self.b[n - 1] * s;
        }
        sum
    }

    /// `u(x) − u(y)` evaluated without cancellation for close arguments:
    /// `Σ 2 sin(n(x−y)/2) [b_n cos(n(x+y)/2) − a_n sin(n(x+y)/2)]`.
    pub fn difference(&self, x: f64, y: f64) -> f64 {
        self.centered_difference(0.5 * (x + y), 0.5 * (x - y))
    }

    /// `u(m + h) − u(m − h)`; the separation `2h` is taken exactly, so this
    /// stays accurate when `h` is far below the resolution of `m`.
    pub fn centered_difference(&self, m: f64, h: f64) -> f64 {
        let (half_sum, half_diff) = (m, h);
        let mut sum = 0.0;
        for n in 1..=self.n_modes {
            let nf = n as f64;
            let sd = (nf * half_diff).sin();
            let (ss, cs) = (nf * half_sum).sin_cos();
            sum += 2.0 * sd * (self.b[n - 1] * cs - self.a[n - 1] * ss);
        }
        sum
    }

    /// Samples on `m` equispaced nodes of `[0, 2π)`.
    pub fn synthesize(&self, m: usize) -> Result<Vec<f64>> {
        let needed = min_grid(self.n_modes);
        if m < needed {
            return Err(Error::GridTooCoarse { got: m, n_modes: self.n_modes, needed });
        }
        if let Some(cache) = &self.grid_cache {
            if cache.len() == m {
                return Ok(cache.clone());
            }
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[0] = Complex64::new(self.a0, 0.0);
        for n in 1..=self.n_modes {
            let (an, bn) = (self.a[n - 1], self.b[n - 1]);
            buf[n] = Complex64::new(0.5 * an, -0.5 * bn);
            buf[m - n] = Complex64::new(0.5 * an, 0.5 * bn);
        }
        fft_inverse(m).process(&mut buf);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Discrete Fourier projection of equispaced samples onto `n_modes` modes.
    pub fn analyze(samples: &[f64], n_modes: usize) -> Result<PeriodicFunction> {
        let m = samples.len();
        let needed = min_grid(n_modes);
        if n_modes == 0 {
            return Err(Error::InvalidParameter("n_modes must be positive".into()));
        }
        if m < needed {
            return Err(Error::GridTooCoarse { got: m, n_modes, needed });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainViolation("non-finite sample".into()));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_forward(m).process(&mut buf);
        let scale = 2.0 / m as f64;
        let a0 = buf[0].re / m as f64;
        let a = (1..=n_modes).map(|n| scale * buf[n].re).collect();
        let b = (1..=n_modes).map(|n| -scale * buf[n].im).collect();
        Ok(PeriodicFunction { n_modes, a0, a, b, grid_cache: None })
    }

    /// Termwise derivative `(a_n, b_n) ↦ (n b_n, −n a_n)`.
    pub fn derivative(&self) -> PeriodicFunction {
        self.map_modes(|_| 0.0, |n, a, b| (n as f64 * b, -(n as f64) * a))
    }

    /// `φ(u(t))` on a grid of `refinement·(2N+1)` nodes, projected back onto `N` modes.
    pub fn compose(&self, phi: &Nonlinearity, refinement: usize) -> Result<PeriodicFunction> {
        let m = refinement.max(1) * min_grid(self.n_modes);
        let samples = self.synthesize(m)?;
        if phi.requires_positive() {
            if let Some((j, &v)) = samples.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(Error::DomainViolation(format!(
                    "u(t) = {v:e} ≤ 0 at t = {:.6} where the nonlinearity needs t > 0",
                    2.0 * PI * j as f64 / m as f64
                )));
            }
        }
        let values: Vec<f64> = samples.iter().map(|&v| phi.eval(v)).collect();
        PeriodicFunction::analyze(&values, self.n_modes)
    }

    /// Samples on the sup-norm monitor grid.
    pub fn fine_samples(&self) -> Vec<f64> {
        self.synthesize(SUP_REFINEMENT * min_grid(self.n_modes)).expect("monitor grid is large enough")
    }

    pub fn min_value(&self) -> f64 {
        self.fine_samples().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.fine_samples().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.fine_samples().into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `‖u‖_{L²(0,2π)} = sqrt(2π a0² + π Σ (a_n² + b_n²))`.
    pub fn l2_norm(&self) -> f64 {
        let modes: f64 = self.a.iter().zip(&self.b).map(|(a, b)| a * a + b * b).sum();
        (2.0 * PI * self.a0 * self.a0 + PI * modes).sqrt()
    }

    /// Euclidean norm of the raw coefficient vector `(a0, a_n, b_n)`.
    pub fn coeff_norm(&self) -> f64 {
        (self.a0 * self.a0 + self.a.iter().chain(&self.b).map(|c| c * c).sum::<f64>()).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.a.iter().chain(&self.b).fold(self.a0.abs(), |acc, c| acc.max(c.abs()))
    }

    pub fn hs_energy(&self, s: f64) -> f64 {
        PI * (1..=self.n_modes)
            .map(|n| {
                let (a, b) = self.mode(n);
                (n as f64).powf(2.0 * s) * (a * a + b * b)
            })
            .sum::<f64>()
    }

    pub fn norms(&self, s: f64) -> Norms {
        Norms { l2: self.l2_norm(), sup: self.sup_norm(), mean: self.a0, hs_energy: self.hs_energy(s) }
    }

    /// `∫_0^{2π} u v dt` from coefficients.
    pub fn inner(&self, other: &PeriodicFunction) -> f64 {
        let n = self.n_modes.min(other.n_modes);
        let modes: f64 = (1..=n)
            .map(|k| {
                let (a1, b1) = self.mode(k);
                let (a2, b2) = other.mode(k);
                a1 * a2 + b1 * b2
            })
            .sum();
        2.0 * PI * self.a0 * other.a0 + PI * modes
    }

    /// Fraction of non-mean spectral energy in modes `n > N/2`.
    pub fn high_mode_fraction(&self) -> f64 {
        let energy = |n: usize| {
            let (a, b) = self.mode(n);
            a * a + b * b
        };
        let total: f64 = (1..=self.n_modes).map(energy).sum();
        if total == 0.0 {
            return 0.0;
        }
        let high: f64 = (self.n_modes / 2 + 1..=self.n_modes).map(energy).sum();
        high / total
    }

    /// Flat layout `[a0, a_1..a_N, b_1..b_N]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.n_modes + 1);
        v.push(self.a0);
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn from_vec(v: &[f64]) -> Result<PeriodicFunction> {
        if v.len() < 3 || v.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector of length {} is not 2N+1",
                v.len()
            )));
        }
        let n = (v.len() - 1) / 2;
        PeriodicFunction::new(v[0], v[1..=n].to_vec(), v[n + 1..].to_vec())
    }

    /// Flat layout of the mean-zero part `[a_1..a_N, b_1..b_N]`.
    pub fn to_vec_zero_mean(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.n_modes);
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn from_vec_zero_mean(v: &[f64]) -> Result<PeriodicFunction> {
        if v.is_empty() || !v.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector of length {} is not 2N",
                v.len()
            )));
        }
        let n = v.len() / 2;
        PeriodicFunction::new(0.0, v[..n].to_vec(), v[n..].to_vec())
    }

    /// Basis function `cos(nt)` (`sine = false`) or `sin(nt)` with `n_modes` modes.
    pub fn basis(n_modes: usize, n: usize, sine: bool) -> PeriodicFunction {
        let mut f = Self::zeros(n_modes);
        if n == 0 {
            f.a0 = 1.0;
        } else if sine {
            f.b[n - 1] = 1.0;
        } else {
            f.a[n - 1] = 1.0;
        }
        f
    }

    fn zip_with(&self, other: &PeriodicFunction, op: impl Fn(f64, f64) -> f64) -> PeriodicFunction {
        let n = self.n_modes.max(other.n_modes);
        let lhs = self.resized(n);
        let rhs = other.resized(n);
        PeriodicFunction {
            n_modes: n,
            a0: op(lhs.a0, rhs.a0),
            a: lhs.a.iter().zip(&rhs.a).map(|(x, y)| op(*x, *y)).collect(),
            b: lhs.b.iter().zip(&rhs.b).map(|(x, y)| op(*x, *y)).collect(),
            grid_cache: None,
        }
    }

    pub fn scale(&self, factor: f64) -> PeriodicFunction {
        self.map_modes(|a0| factor * a0, |_, a, b| (factor * a, factor * b))
    }

    pub fn l2_distance(&self, other: &PeriodicFunction) -> f64 {
        (self - other).l2_norm()
    }

    /// Two-column `t,<label>` CSV of samples on `m` nodes.
    pub fn to_csv(&self, m: usize, label: &str) -> Result<String> {
        let samples = self.synthesize(m)?;
        let mut out = format!("t,{label}\n");
        for (t, v) in grid_nodes(m).iter().zip(samples) {
            out.push_str(&format!("{t},{v}\n"));
        }
        Ok(out)
    }
}

impl Add for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn add(self, rhs: &PeriodicFunction) -> PeriodicFunction {
        self.zip_with(rhs, |x, y| x + y)
    }
}

impl Sub for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn sub(self, rhs: &PeriodicFunction) -> PeriodicFunction {
        self.zip_with(rhs, |x, y| x - y)
    }
}

impl Mul<f64> for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn mul(self, rhs: f64) -> PeriodicFunction {
        self.scale(rhs)
    }
}

impl Neg for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn neg(self) -> PeriodicFunction {
        self.scale(-1.0)
    }
}

/// Configuration of the singular-integral quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_refinement_depth: usize,
    pub tail_cutoff_periods: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-8, max_refinement_depth: 60, tail_cutoff_periods: 16 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidParameter(format!("abs_tol must be positive (got {})", self.abs_tol)));
        }
        if self.max_refinement_depth == 0 {
            return Err(Error::InvalidParameter("max_refinement_depth must be at least 1".into()));
        }
        if self.tail_cutoff_periods == 0 {
            return Err(Error::InvalidParameter("tail_cutoff_periods must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn synthesize_quarter_nodes() {
        let f = PeriodicFunction::from_modes(1, 2.0, &[(1, 1.0, 0.0)]).unwrap();
        let s = f.synthesize(4).unwrap();
        for (got, want) in s.iter().zip([3.0, 2.0, 1.0, 2.0]) {
            assert!(close(*got, want, 1e-14), "{got} vs {want}");
        }
    }

    #[test]
    fn zero_function_synthesizes_to_zero() {
        let f = PeriodicFunction::zeros(5);
        assert!(f.synthesize(17).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let f = PeriodicFunction::zeros(4);
        assert_eq!(f.synthesize(8), Err(Error::GridTooCoarse { got: 8, n_modes: 4, needed: 9 }));
        assert!(PeriodicFunction::analyze(&[0.0; 8], 4).is_err());
    }

    #[test]
    fn analyze_single_cosine() {
        let samples: Vec<f64> = grid_nodes(9).iter().map(|t| (2.0 * t).cos()).collect();
        let f = PeriodicFunction::analyze(&samples, 4).unwrap();
        assert!(close(f.a0(), 0.0, 1e-15));
        for n in 1..=4 {
            let (a, b) = f.mode(n);
            assert!(close(a, if n == 2 { 1.0 } else { 0.0 }, 1e-15));
            assert!(close(b, 0.0, 1e-15));
        }
    }

    #[test]
    fn analyze_constant_and_cos_squared() {
        let f = PeriodicFunction::analyze(&[5.0; 11], 5).unwrap();
        assert!(close(f.a0(), 5.0, 1e-14));
        assert!(f.max_abs_coeff() - 5.0 < 1e-14);

        let samples: Vec<f64> = grid_nodes(13).iter().map(|t| t.cos().powi(2)).collect();
        let g = PeriodicFunction::analyze(&samples, 6).unwrap();
        assert!(close(g.a0(), 0.5, 1e-15));
        assert!(close(g.mode(2).0, 0.5, 1e-15));
        assert!(close(g.mode(1).0, 0.0, 1e-15));
    }

    #[test]
    fn derivative_rules() {
        let c = PeriodicFunction::basis(3, 1, false);
        let dc = c.derivative();
        assert_eq!(dc.mode(1), (0.0, -1.0));
        assert_eq!(PeriodicFunction::constant(3, 4.0).derivative(), PeriodicFunction::zeros(3));
        let s3 = PeriodicFunction::basis(3, 3, true);
        assert_eq!(s3.derivative().mode(3), (3.0, 0.0));
    }

    #[test]
    fn compose_square_and_reciprocal() {
        let c = PeriodicFunction::basis(4, 1, false);
        let sq = c.compose(&Nonlinearity::from_pairs(&[(1.0, 2.0)]), 3).unwrap();
        assert!(close(sq.a0(), 0.5, 1e-14));
        assert!(close(sq.mode(2).0, 0.5, 1e-14));
        assert!(close(sq.mode(1).0, 0.0, 1e-14));

        let inv = Nonlinearity::from_pairs(&[(1.0, -1.0)]);
        let two = PeriodicFunction::constant(4, 2.0);
        let half = two.compose(&inv, 3).unwrap();
        assert!(close(half.a0(), 0.5, 1e-15));
        assert!(matches!(c.compose(&inv, 3), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn norms_of_simple_functions() {
        let c = PeriodicFunction::basis(4, 1, false);
        for s in [0.3, 0.6, 0.9] {
            assert!(close(c.hs_energy(s), PI, 1e-14));
        }
        let three = PeriodicFunction::constant(4, 3.0);
        let n = three.norms(0.7);
        assert!(close(n.l2, 3.0 * (2.0 * PI).sqrt(), 1e-13));
        assert_eq!(n.hs_energy, 0.0);
        assert!(close(n.sup, 3.0, 1e-14));
        let c2 = PeriodicFunction::basis(4, 2, false);
        assert!(close(c2.hs_energy(0.5), 2.0 * PI, 1e-13));
    }

    #[test]
    fn grid_cache_matches_synthesis() {
        let f = PeriodicFunction::from_modes(3, 1.0, &[(1, 0.5, -0.25), (3, 0.0, 2.0)]).unwrap();
        let cached = f.clone().with_grid_cache(11).unwrap();
        let direct = f.synthesize(11).unwrap();
        for (c, d) in cached.grid_cache().unwrap().iter().zip(&direct) {
            assert!((c - d).abs() <= 1e-12 * (1.0 + d.abs()));
        }
        for (j, t) in grid_nodes(11).iter().enumerate() {
            assert!((f.eval(*t) - direct[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn stable_difference_matches_direct() {
        let f = PeriodicFunction::from_modes(4, 0.3, &[(1, 1.0, 0.2), (4, -0.5, 0.7)]).unwrap();
        for (x, y) in [(0.3, 1.7), (2.0, -5.0), (1.0, 1.0 + 1e-9)] {
            let direct = f.eval(x) - f.eval(y);
            assert!((f.difference(x, y) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn vector_layouts_roundtrip() {
        let f = PeriodicFunction::from_modes(3, 1.5, &[(2, 0.5, -1.0)]).unwrap();
        assert_eq!(PeriodicFunction::from_vec(&f.to_vec()).unwrap(), f);
        let z = PeriodicFunction::from_vec_zero_mean(&f.to_vec_zero_mean()).unwrap();
        assert_eq!(z, f.without_mean());
    }

    #[test]
    fn quadrature_config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig { abs_tol: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig { max_refinement_depth: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
