//! Numerical checks of the analytic identities satisfied by `A_s`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_op::{apply_spectral, image_sum, normalization_c1s, FracOrder, KernelQuadrature};
use crate::quad::{self, Estimate};
use crate::trig::{PeriodicFunction, QuadratureConfig};

/// `|∫_0^{2π} A_s f dt|` from the spectral form; structurally zero.
pub fn check_zero_mean(f: &PeriodicFunction, s: FracOrder) -> f64 {
    2.0 * PI * apply_spectral(f, s).mean().abs()
}

/// `|∫_0^{2π} A_s f dt|` with `A_s f` evaluated pointwise by the kernel form.
///
/// `A_s f` is a trig polynomial of degree `N`, so the trapezoidal rule on
/// `2N + 1` nodes integrates it exactly; the residual is pure kernel error.
pub fn check_zero_mean_kernel(f: &PeriodicFunction, s: FracOrder, q: &QuadratureConfig) -> Result<f64> {
    let kq = KernelQuadrature::new(s, *q)?;
    let m = 2 * f.n_modes() + 1;
    let mut sum = 0.0;
    for j in 0..m {
        sum += kq.apply(f, 2.0 * PI * j as f64 / m as f64)?;
    }
    Ok(2.0 * PI * (sum / m as f64).abs())
}

/// `|∫_0^{2π} A_s f · f′ dt|` by Parseval on the coefficients.
pub fn check_orthogonality(f: &PeriodicFunction, s: FracOrder) -> f64 {
    apply_spectral(f, s).inner(&f.derivative()).abs()
}

/// `(‖f − f̄‖², (2π)^{2s} [f]²)`; the Poincaré inequality says `lhs ≤ rhs`.
pub fn check_poincare(f: &PeriodicFunction, s: FracOrder) -> (f64, f64) {
    let lhs = f.without_mean().l2_norm().powi(2);
    let sv = s.value();
    let rhs = (2.0 * PI).powf(2.0 * sv) * f.hs_energy(sv);
    (lhs, rhs)
}

/// The pieces of the energy identity
/// `∫_a^b u′ A_s u = C(1,s)/2 · (B(b) − B(a) − (1+2s) S_right + (1+2s) S_left)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub lhs: f64,
    /// `∫_ℝ (u(b) − u(y))² |b − y|^{−1−2s} dy`
    pub boundary_b: f64,
    pub boundary_a: f64,
    /// `∫_a^b ∫_b^∞ (u(x) − u(y))² |x − y|^{−2−2s} dy dx`
    pub strip_right: f64,
    /// `∫_a^b ∫_{−∞}^a (u(x) − u(y))² |x − y|^{−2−2s} dy dx`
    pub strip_left: f64,
    pub rhs_total: f64,
    pub a: f64,
    pub b: f64,
    pub quadrature_error_estimate: f64,
}

impl EnergyBreakdown {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs_total).abs()
    }
}

/// Bounds `Σ n^k (|a_n| + |b_n|) ≥ sup |u^{(k)}|` for `k = 0..=3`.
fn derivative_bounds(u: &PeriodicFunction) -> [f64; 4] {
    let mut m = [u.a0().abs(), 0.0, 0.0, 0.0];
    for n in 1..=u.n_modes() {
        let (a, b) = u.mode(n);
        let amp = a.abs() + b.abs();
        let nf = n as f64;
        m[0] += amp;
        m[1] += nf * amp;
        m[2] += nf * nf * amp;
        m[3] += nf * nf * nf * amp;
    }
    m
}

/// Smallest `ε = x0 / 2^k` (at most `max_levels` halvings) with `bound(ε) ≤ target`.
fn grading_depth(x0: f64, target: f64, max_levels: usize, bound: impl Fn(f64) -> f64) -> Result<usize> {
    let mut levels = 0;
    while bound(x0 * 0.5f64.powi(levels as i32)) > target {
        levels += 1;
        if levels > max_levels {
            return Err(Error::QuadratureNonConvergence(format!(
                "graded mesh needs more than {max_levels} levels"
            )));
        }
    }
    Ok(levels)
}

/// Panels of width `width` covering `[lo, hi]`.
fn uniform_panels(lo: f64, hi: f64, width: f64) -> Vec<(f64, f64)> {
    let count = ((hi - lo) / width).ceil().max(1.0) as usize;
    let h = (hi - lo) / count as f64;
    (0..count).map(|k| (lo + k as f64 * h, lo + (k + 1) as f64 * h)).collect()
}

struct EnergyQuad<'a> {
    u: &'a PeriodicFunction,
    du: PeriodicFunction,
    p: f64,
    tol: f64,
    depth: usize,
    images: usize,
    bounds: [f64; 4],
}

impl EnergyQuad<'_> {
    /// Panels of `[1, 1 + 2π]` narrow enough for the highest mode.
    fn period_panels(&self) -> Vec<(f64, f64)> {
        let width = PI / (2 * self.u.n_modes().max(1)) as f64;
        uniform_panels(1.0, 1.0 + 2.0 * PI, width)
    }

    /// `B(x0) = ∫_0^∞ [(u(x0) − u(x0+h))² + (u(x0) − u(x0−h))²] h^{−p} dh`.
    ///
    /// The bracket is 2π-periodic in `h`, so the range `h ≥ 1` folds onto one
    /// period against the image sum `Σ_k (h + 2πk)^{−p}`.
    fn boundary(&self, x0: f64) -> Result<Estimate> {
        let u = self.u;
        let p = self.p;
        let slope = self.du.eval(x0);
        let [_, m1, m2, m3] = self.bounds;
        // |P(h) − 2u′²h²| ≤ (m2²/2 + m1 m3) h⁴ for the paired squares
        let k4 = 0.5 * m2 * m2 + m1 * m3;
        let near_bound = |eps: f64| k4 * eps.powf(5.0 - p) / (5.0 - p);
        let levels = grading_depth(1.0, 0.125 * self.tol, self.depth, near_bound)?;
        let eps = 0.5f64.powi(levels as i32);

        let bracket = |h: f64| {
            let l = u.centered_difference(x0 + 0.5 * h, 0.5 * h);
            let r = u.centered_difference(x0 - 0.5 * h, 0.5 * h);
            l * l + r * r
        };
        let mut near_field = |h: f64| bracket(h) * h.powf(-p);
        let panels = quad::geometric_panels(1.0, levels);
        let near_part = quad::over_panels(&mut near_field, &panels, 0.25 * self.tol, self.depth)?;

        let mut image_bound = 0.0f64;
        let mut far_field = |h: f64| {
            let (w, bound) = image_sum(h, p, self.images);
            image_bound = image_bound.max(bound);
            bracket(h) * w
        };
        let far_part = quad::over_panels(&mut far_field, &self.period_panels(), 0.25 * self.tol, self.depth)?;
        let sup = self.bounds[0];

        let near = 2.0 * slope * slope * eps.powf(3.0 - p) / (3.0 - p);
        Ok(Estimate {
            value: near_part.value + far_part.value + near,
            error: near_part.error + far_part.error + near_bound(eps) + 16.0 * PI * sup * sup * image_bound,
        })
    }

    /// `∫_0^{b−a} ∫_0^∞ (u(edge − σd) − u(edge + σr))² (d + r)^{−q} dr dd`
    /// with `q = p + 1`, `σ = 1` for the right strip and `−1` for the left.
    fn strip(&self, edge: f64, width: f64, sigma: f64) -> Result<Estimate> {
        let u = self.u;
        let q = self.p + 1.0;
        let s = 0.5 * (self.p - 1.0);
        let slope = self.du.eval(edge);
        let far_panels = self.period_panels();
        let images = self.images;

        // A fixed rule keeps the inner integral a smooth function of d, which
        // the adaptive outer quadrature needs. Panels double outward from the
        // diagonal up to r = 1; beyond, one period against the image sum.
        let inner_rel_error = std::cell::Cell::new(0.0f64);
        let inner = |d: f64| -> f64 {
            // x = edge − σd, y = edge + σr, x − y = −σ(d + r)
            let sq = |r: f64| {
                let diff = u.centered_difference(edge + 0.5 * sigma * (r - d), -0.5 * sigma * (d + r));
                diff * diff
            };
            let mut near = |r: f64| sq(r) * (d + r).powf(-q);
            let mut total = Estimate::ZERO;
            let (mut lo, mut hi) = (0.0, d.min(1.0));
            while lo < 1.0 {
                let mid = 0.5 * (lo + hi);
                total = total + quad::gk15(&mut near, lo, mid) + quad::gk15(&mut near, mid, hi);
                lo = hi;
                hi = (2.0 * hi).min(1.0);
            }
            let mut far = |r: f64| sq(r) * image_sum(d + r, q, images).0;
            for &(lo, hi) in &far_panels {
                total = total + quad::gk15(&mut far, lo, hi);
            }
            if total.value != 0.0 {
                inner_rel_error.set(inner_rel_error.get().max(total.error / total.value.abs()));
            }
            total.value
        };

        // Inner integral as d → 0:
        //   u′² d^{1−2s}/(2s−1) + F₀ + O(d^{2−2s}/(2s−1)).
        // The singular term is integrated exactly on [0, ε] and F₀ is read off
        // at d = ε.
        let leading = |d: f64| slope * slope * d.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0);
        let [m0, m1, m2, _] = self.bounds;
        let k3 = (m1 * m2 + m1 * m1 + m2 * m2 + m0 * m0) / (2.0 * s - 1.0);
        let near_bound = |eps: f64| k3 * eps.powf(3.0 - 2.0 * s);
        let levels = grading_depth(width, 0.125 * self.tol, self.depth, near_bound)?;
        let eps = width * 0.5f64.powi(levels as i32);

        let mut outer = &inner;
        let panels = quad::geometric_panels(width, levels);
        let body = quad::over_panels(&mut outer, &panels, 0.25 * self.tol, self.depth)?;
        let constant = inner(eps) - leading(eps);
        let near = eps * leading(eps) / (2.0 - 2.0 * s) + eps * constant;
        Ok(Estimate {
            value: body.value + near,
            error: body.error + near_bound(eps) + inner_rel_error.get() * (body.value.abs() + near.abs()),
        })
    }
}

/// Evaluates both sides of the energy identity on `[a, b]`.
///
/// The line integrals run over the periodic extension of `u`. Far from the
/// singular point the integrands are folded onto a single period against a
/// lattice sum of the weight, whose first `tail_cutoff_periods` images are
/// summed directly and the rest by Euler–Maclaurin.
pub fn energy_identity(
    u: &PeriodicFunction,
    a: f64,
    b: f64,
    s: FracOrder,
    q: &QuadratureConfig,
) -> Result<EnergyBreakdown> {
    q.validate()?;
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidParameter(format!(
            "energy identity needs 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    if !s.is_standard() {
        // The strip terms diverge at the corner for s ≤ 1/2.
        return Err(Error::InvalidParameter(format!(
            "energy identity needs s in (1/2, 1), got {}",
            s.value()
        )));
    }
    let p = s.kernel_exponent();
    let c1s = normalization_c1s(s);
    let du = u.derivative();
    let au = apply_spectral(u, s);

    let mut lhs_integrand = |t: f64| du.eval(t) * au.eval(t);
    let lhs = quad::adaptive(&mut lhs_integrand, a, b, q.abs_tol, q.max_refinement_depth)?;

    let eq = EnergyQuad {
        u,
        du,
        p,
        tol: q.abs_tol,
        depth: q.max_refinement_depth,
        images: q.tail_cutoff_periods,
        bounds: derivative_bounds(&u.without_mean()),
    };
    let boundary_b = eq.boundary(b)?;
    let boundary_a = eq.boundary(a)?;
    let strip_right = eq.strip(b, b - a, 1.0)?;
    let strip_left = eq.strip(a, b - a, -1.0)?;

    let rhs_total =
        0.5 * c1s * (boundary_b.value - boundary_a.value - p * strip_right.value + p * strip_left.value);
    let error = lhs.error
        + 0.5 * c1s * (boundary_b.error + boundary_a.error + p * (strip_right.error + strip_left.error));
    Ok(EnergyBreakdown {
        lhs: lhs.value,
        boundary_b: boundary_b.value,
        boundary_a: boundary_a.value,
        strip_right: strip_right.value,
        strip_left: strip_left.value,
        rhs_total,
        a,
        b,
        quadrature_error_estimate: error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn zero_mean_both_routes() {
        let f = PeriodicFunction::from_modes(4, 0.0, &[(1, 1.0, 0.0), (4, 0.0, 1.0)]).unwrap();
        assert!(check_zero_mean(&f, order(0.8)) <= 1e-12);
        let r = check_zero_mean_kernel(&f, order(0.8), &QuadratureConfig::default()).unwrap();
        assert!(r <= 1e-6, "{r}");
        assert_eq!(check_zero_mean(&PeriodicFunction::constant(3, 2.0), order(0.6)), 0.0);
    }

    #[test]
    fn orthogonality_examples() {
        let f = PeriodicFunction::from_modes(7, 3.0, &[(2, 1.0, 0.0), (7, 0.0, 0.5)]).unwrap();
        assert!(check_orthogonality(&f, order(0.7)) <= 1e-10);
        assert_eq!(check_orthogonality(&PeriodicFunction::basis(1, 1, false), order(0.6)), 0.0);
    }

    #[test]
    fn poincare_single_mode() {
        let f = PeriodicFunction::basis(1, 1, false);
        let (lhs, rhs) = check_poincare(&f, order(0.75));
        assert!((lhs - PI).abs() < 1e-12);
        assert!((rhs - (2.0 * PI).powf(1.5) * PI).abs() < 1e-9);
        assert_eq!(check_poincare(&PeriodicFunction::constant(2, 4.0), order(0.75)), (0.0, 0.0));
    }

    #[test]
    fn energy_identity_vanishes_on_constants() {
        let f = PeriodicFunction::constant(2, 1.5);
        let e = energy_identity(&f, 0.5, 2.0, order(0.7), &QuadratureConfig::default()).unwrap();
        assert_eq!(e.lhs, 0.0);
        assert_eq!(e.boundary_a, 0.0);
        assert_eq!(e.strip_right, 0.0);
        assert_eq!(e.rhs_total, 0.0);
    }

    #[test]
    fn energy_identity_on_cosine() {
        let f = PeriodicFunction::basis(1, 1, false);
        let q = QuadratureConfig { abs_tol: 1e-6, ..Default::default() };
        let e = energy_identity(&f, PI / 4.0, PI / 2.0, order(0.75), &q).unwrap();
        assert!((e.lhs + 0.25).abs() < 1e-12, "{e:?}");
        assert!(e.residual() < 1e-3, "{e:?}");
    }

    #[test]
    fn energy_identity_general_polynomial() {
        let g =
            PeriodicFunction::from_modes(5, 0.3, &[(1, 0.2, -0.5), (3, 0.1, 0.4), (5, -0.2, 0.05)]).unwrap();
        let q = QuadratureConfig { abs_tol: 1e-8, ..Default::default() };
        for s in [0.55, 0.75, 0.95] {
            let e = energy_identity(&g, 0.3, 2.9, order(s), &q).unwrap();
            assert!(e.residual() <= e.quadrature_error_estimate, "{s}: {e:?}");
            assert!(e.residual() < 1e-9, "{s}: {e:?}");
        }
    }

    #[test]
    fn energy_identity_rejects_bad_interval() {
        let f = PeriodicFunction::basis(1, 1, false);
        let q = QuadratureConfig::default();
        assert!(energy_identity(&f, 0.0, 1.0, order(0.7), &q).is_err());
        assert!(energy_identity(&f, 2.0, 1.0, order(0.7), &q).is_err());
    }
}
