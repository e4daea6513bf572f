//! The periodic fractional Laplacian in two independent forms.
//!
//! The spectral form scales mode `n` by `n^{2s}`. The kernel form integrates
//! `C(1,s) ∫_0^{2π} (u(t) − u(y)) K(t − y) dy` against the periodized kernel
//! `K(z) = Σ_n |z − 2πn|^{−(1+2s)}`. The two agree on smooth functions and
//! serve as oracles for each other.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Estimate};
use crate::trig::{PeriodicFunction, QuadratureConfig};

/// Fractional order `s ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("fractional order s = {s} outside (0, 1)")));
        }
        Ok(Self(s))
    }

    /// Order in the solver range `(1/2, 1)`.
    pub fn standard(s: f64) -> Result<Self> {
        Self::new(s)?.require_standard()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether `s ∈ (1/2, 1)`, where the drift term is subordinate.
    pub fn is_standard(self) -> bool {
        self.0 > 0.5
    }

    pub fn require_standard(self) -> Result<Self> {
        if self.is_standard() {
            Ok(self)
        } else {
            Err(Error::InvalidParameter(format!("solvers need s in (1/2, 1), got {}", self.0)))
        }
    }

    /// Kernel exponent `1 + 2s`.
    pub fn kernel_exponent(self) -> f64 {
        1.0 + 2.0 * self.0
    }

    /// Multiplier `n^{2s}`.
    pub fn multiplier(self, n: usize) -> f64 {
        (n as f64).powf(2.0 * self.0)
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        FracOrder::new(s)
    }
}

impl From<FracOrder> for f64 {
    fn from(s: FracOrder) -> f64 {
        s.0
    }
}

/// Sign bookkeeping between the canonical operator and the signed Laplacian.
///
/// Everything in this crate is built on `A_s = (−Δ)^s`, whose multipliers
/// `n^{2s}` are non-negative. The signed operator `(Δ)^s` that appears in the
/// model equations is `−A_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumericalConvention;

impl NumericalConvention {
    /// Factor relating `(Δ)^s` to `A_s`.
    pub const SIGN: f64 = -1.0;

    /// `(Δ)^s u = −A_s u`.
    pub fn signed_laplacian(f: &PeriodicFunction, s: FracOrder) -> PeriodicFunction {
        apply_spectral(f, s).scale(Self::SIGN)
    }
}

/// Orientation of the operator term in a model equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSign {
    /// `(Δ)^s = −A_s`.
    #[default]
    Laplacian,
    /// `(−Δ)^s = A_s`.
    NegLaplacian,
}

impl OperatorSign {
    pub fn factor(self) -> f64 {
        match self {
            OperatorSign::Laplacian => NumericalConvention::SIGN,
            OperatorSign::NegLaplacian => 1.0,
        }
    }
}

/// `A_s f`: mode `n` scaled by `n^{2s}`, mean removed.
pub fn apply_spectral(f: &PeriodicFunction, s: FracOrder) -> PeriodicFunction {
    f.map_modes(
        |_| 0.0,
        |n, a, b| {
            let m = s.multiplier(n);
            (m * a, m * b)
        },
    )
}

/// Periodized kernel value with a certified truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    /// Bound on the Euler–Maclaurin remainder plus summation rounding.
    pub tail_bound: f64,
    /// Images summed directly on each side.
    pub images: usize,
}

// B_2, B_4, ..., B_18
const BERNOULLI: [f64; 9] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
];

/// `Σ_{k ≥ 0} (k + q)^{−p}` as direct terms `k < n` plus an Euler–Maclaurin
/// tail; returns `(value, remainder bound)`. For this completely monotone
/// summand the remainder is bounded by the first omitted correction term.
fn hurwitz_sum(p: f64, q: f64, n: usize) -> (f64, f64) {
    let direct: f64 = (0..n).map(|k| (k as f64 + q).powf(-p)).sum();
    let x = n as f64 + q;
    let xp = x.powf(-p);
    let mut tail = x * xp / (p - 1.0) + 0.5 * xp;
    // c_j = (p)_{2j-1} / (2j)!
    let mut c = p / 2.0;
    let mut xpow = xp / x;
    let inv_x2 = 1.0 / (x * x);
    let corrections = BERNOULLI.len() - 1;
    for j in 1..=corrections {
        tail += BERNOULLI[j - 1] * c * xpow;
        let jf = j as f64;
        c *= (p + 2.0 * jf - 1.0) * (p + 2.0 * jf) / ((2.0 * jf + 1.0) * (2.0 * jf + 2.0));
        xpow *= inv_x2;
    }
    let omitted = (BERNOULLI[corrections] * c * xpow).abs();
    (direct + tail, 2.0 * omitted)
}

/// `Σ_{k ≥ 0} (x + 2πk)^{−p}` for `x > 0`, `p > 1`, with a remainder bound.
pub(crate) fn image_sum(x: f64, p: f64, images: usize) -> (f64, f64) {
    let scale = (2.0 * PI).powf(-p);
    let (value, bound) = hurwitz_sum(p, x / (2.0 * PI), images.max(1));
    (scale * value, scale * bound)
}

fn check_kernel_argument(z: f64) -> Result<()> {
    if !(z > 0.0 && z < 2.0 * PI) {
        return Err(Error::ArgumentOutOfRange(format!("kernel argument z = {z} outside (0, 2π)")));
    }
    Ok(())
}

/// `K(z)` with `images` directly summed terms on each side of the lattice.
pub fn kernel_with_images(z: f64, s: FracOrder, images: usize) -> Result<KernelValue> {
    check_kernel_argument(z)?;
    let images = images.max(1);
    let p = s.kernel_exponent();
    let scale = (2.0 * PI).powf(-p);
    let q = z / (2.0 * PI);
    // Images z + 2πk and 2π(k+1) − z for k ≥ 0.
    let (right, right_bound) = hurwitz_sum(p, q, images);
    let (left, left_bound) = hurwitz_sum(p, 1.0 - q, images);
    let value = scale * (right + left);
    let rounding = 8.0 * f64::EPSILON * value * (images as f64).sqrt();
    Ok(KernelValue { value, tail_bound: scale * (right_bound + left_bound) + rounding, images })
}

/// `K(z)` to absolute accuracy `tol`, doubling the image count as needed.
pub fn kernel_k(z: f64, s: FracOrder, tol: f64) -> Result<KernelValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let mut images = 4;
    loop {
        let k = kernel_with_images(z, s, images)?;
        if k.tail_bound <= tol {
            return Ok(k);
        }
        if images >= 1 << 16 {
            return Err(Error::InvalidParameter(format!(
                "kernel tolerance {tol:e} is below attainable accuracy {:e}",
                k.tail_bound
            )));
        }
        images *= 2;
    }
}

/// Kernel evaluation used inside quadratures (8 images per side, ~1e-15 relative).
fn kernel_fast(z: f64, s: FracOrder) -> f64 {
    let p = s.kernel_exponent();
    let q = z / (2.0 * PI);
    let (right, _) = hurwitz_sum(p, q, 8);
    let (left, _) = hurwitz_sum(p, 1.0 - q, 8);
    (2.0 * PI).powf(-p) * (right + left)
}

/// `C(1,s) = (∫_ℝ (1 − cos ξ) |ξ|^{−1−2s} dξ)^{−1}`.
///
/// On `|ξ| < 1` the integrand is expanded in its Taylor series; on `[1, X]`
/// adaptive quadrature over half-periods; beyond `X = 64π` the asymptotic
/// integration-by-parts series of `∫ cos ξ ξ^{−p}`.
pub fn normalization_c1s(s: FracOrder) -> f64 {
    1.0 / normalization_integral(s)
}

/// `∫_ℝ (1 − cos ξ) |ξ|^{−1−2s} dξ`.
pub fn normalization_integral(s: FracOrder) -> f64 {
    let sv = s.value();
    let p = s.kernel_exponent();

    // ∫_0^1: Σ_k (−1)^{k+1} / ((2k)! (2k − 2s))
    let mut inner = 0.0;
    let mut fact = 1.0;
    for k in 1..30 {
        let kf = k as f64;
        fact *= (2.0 * kf - 1.0) * (2.0 * kf);
        let term = 1.0 / (fact * (2.0 * kf - 2.0 * sv));
        inner += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }

    // ∫_1^X cos ξ ξ^{-p}
    let periods = 32;
    let x_end = 2.0 * PI * periods as f64;
    let mut f = |xi: f64| xi.cos() * xi.powf(-p);
    let mut oscillatory = quad::adaptive(&mut f, 1.0, PI, 1e-15, 30).expect("smooth integrand").value;
    for k in 1..2 * periods {
        let a = PI * k as f64;
        oscillatory += quad::adaptive(&mut f, a, a + PI, 1e-15, 30).expect("smooth integrand").value;
    }
    // ∫_X^∞ cos ξ ξ^{-p} = p X^{-p-1} − p(p+1)(p+2) X^{-p-3} + ...
    let mut coeff = p;
    let mut xpow = x_end.powf(-p - 1.0);
    let mut sign = 1.0;
    for j in 0..5 {
        oscillatory += sign * coeff * xpow;
        let jf = j as f64;
        coeff *= (p + 2.0 * jf + 1.0) * (p + 2.0 * jf + 2.0);
        xpow /= x_end * x_end;
        sign = -sign;
    }

    let outer = 1.0 / (p - 1.0) - oscillatory;
    2.0 * (inner + outer)
}

/// Kernel-form evaluator of `A_s` at single points.
#[derive(Debug, Clone, Copy)]
pub struct KernelQuadrature {
    s: FracOrder,
    config: QuadratureConfig,
    c1s: f64,
}

impl KernelQuadrature {
    pub fn new(s: FracOrder, config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { s, config, c1s: normalization_c1s(s) })
    }

    pub fn c1s(&self) -> f64 {
        self.c1s
    }

    /// `A_s f(t)` with an error estimate.
    ///
    /// Pairing `y = t ± h` and using `K(h) = K(2π − h)` gives
    /// `C(1,s) ∫_0^π (2f(t) − f(t+h) − f(t−h)) K(h) dh`, where the bracket is
    /// `4 Σ c_n(t) sin²(nh/2)` with `c_n(t) = a_n cos nt + b_n sin nt`. The
    /// integrand behaves like `h^{1−2s}` at the origin: geometric panels cover
    /// `[ε, π]` and the leading term is integrated exactly on `[0, ε]`.
    pub fn apply_with_error(&self, f: &PeriodicFunction, t: f64) -> Result<Estimate> {
        let p = self.s.kernel_exponent();
        let n_modes = f.n_modes();
        let coeffs: Vec<f64> = (1..=n_modes)
            .map(|n| {
                let (a, b) = f.mode(n);
                let (sn, cn) = (n as f64 * t).sin_cos();
                a * cn + b * sn
            })
            .collect();
        if coeffs.iter().all(|c| *c == 0.0) {
            return Ok(Estimate::ZERO);
        }
        let mut second = 0.0;
        let mut abs2 = 0.0;
        let mut abs4 = 0.0;
        for (i, c) in coeffs.iter().enumerate() {
            let n2 = ((i + 1) * (i + 1)) as f64;
            second += n2 * c;
            abs2 += n2 * c.abs();
            abs4 += n2 * n2 * c.abs();
        }

        let tol = self.config.abs_tol / self.c1s;
        let k_pi = kernel_fast(PI, self.s);
        // |∫_0^ε D K − D₂ ∫_0^ε h^{2−p}| ≤ Σn⁴|c_n| ε^{5−p}/(12(5−p)) + Σn²|c_n| K(π) ε³/3
        let near_bound =
            |eps: f64| abs4 * eps.powf(5.0 - p) / (12.0 * (5.0 - p)) + abs2 * k_pi * eps.powi(3) / 3.0;
        let mut levels = 1;
        while near_bound(PI * 0.5f64.powi(levels as i32)) > 0.25 * tol {
            levels += 1;
            if levels > self.config.max_refinement_depth {
                return Err(Error::QuadratureNonConvergence(format!(
                    "graded mesh needs more than {} levels",
                    self.config.max_refinement_depth
                )));
            }
        }
        let eps = PI * 0.5f64.powi(levels as i32);

        let s = self.s;
        let mut integrand = |h: f64| {
            let bracket: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let x = (0.5 * (i + 1) as f64 * h).sin();
                    4.0 * c * x * x
                })
                .sum();
            bracket * kernel_fast(h, s)
        };
        let panels = quad::geometric_panels(PI, levels);
        let body = quad::over_panels(&mut integrand, &panels, 0.5 * tol, self.config.max_refinement_depth)?;
        let near = second * eps.powf(3.0 - p) / (3.0 - p);
        Ok(Estimate {
            value: self.c1s * (body.value + near),
            error: self.c1s * (body.error + near_bound(eps)),
        })
    }

    pub fn apply(&self, f: &PeriodicFunction, t: f64) -> Result<f64> {
        self.apply_with_error(f, t).map(|e| e.value)
    }
}

/// `A_s f(t)` by the kernel form.
pub fn apply_kernel(f: &PeriodicFunction, t: f64, s: FracOrder, q: &QuadratureConfig) -> Result<f64> {
    KernelQuadrature::new(s, *q)?.apply(f, t)
}
