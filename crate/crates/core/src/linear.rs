//! Modal solves of `A_s u + γu + cu′ = r`.

use crate::error::{Error, Result};
use crate::frac_op::FracOrder;
use crate::trig::PeriodicFunction;

/// Mean of `r` above which the `γ = 0` problem is declared unsolvable.
pub const SOLVABILITY_TOL: f64 = 1e-12;

/// Solves `A_s u + γu + cu′ = r` mode by mode.
///
/// Mode `n ≥ 1` is the 2×2 system `[[λ, cn], [−cn, λ]] (a, b) = (r_a, r_b)`
/// with `λ = n^{2s} + γ`, whose determinant `λ² + c²n²` is positive. For
/// `γ = 0` the mean of `u` is free and the mean-zero representative is
/// returned.
pub fn solve_linear(r: &PeriodicFunction, s: FracOrder, gamma: f64, c: f64) -> Result<PeriodicFunction> {
    if !(gamma >= 0.0) || !gamma.is_finite() || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite gamma >= 0 and finite c, got gamma = {gamma}, c = {c}"
        )));
    }
    let a0 = if gamma == 0.0 {
        if r.mean().abs() > SOLVABILITY_TOL {
            return Err(Error::SolvabilityViolation { mean: r.mean() });
        }
        0.0
    } else {
        r.mean() / gamma
    };
    Ok(r.map_modes(
        |_| a0,
        |n, ra, rb| {
            let lambda = s.multiplier(n) + gamma;
            let cn = c * n as f64;
            let det = lambda * lambda + cn * cn;
            ((lambda * ra - cn * rb) / det, (lambda * rb + cn * ra) / det)
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_op::apply_spectral;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn resolvent_halves_first_mode() {
        let r = PeriodicFunction::basis(3, 1, false);
        let u = solve_linear(&r, order(0.7), 1.0, 0.0).unwrap();
        assert_eq!(u.mode(1), (0.5, 0.0));
    }

    #[test]
    fn drift_mixes_sine_and_cosine() {
        let r = PeriodicFunction::basis(2, 1, true);
        let u = solve_linear(&r, order(0.5), 0.0, 1.0).unwrap();
        assert!((u.mode(1).0 + 0.5).abs() < 1e-15);
        assert!((u.mode(1).1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_forcing_is_unsolvable_without_gamma() {
        let r = PeriodicFunction::constant(2, 1.0);
        assert!(matches!(solve_linear(&r, order(0.7), 0.0, 0.3), Err(Error::SolvabilityViolation { .. })));
        let u = solve_linear(&r, order(0.7), 2.0, 0.3).unwrap();
        assert_eq!(u.mean(), 0.5);
    }

    #[test]
    fn residual_vanishes() {
        let r =
            PeriodicFunction::from_modes(6, 0.4, &[(1, 0.3, -1.0), (4, 2.0, 0.5), (6, -0.7, 0.1)]).unwrap();
        let (s, gamma, c) = (order(0.8), 0.6, 1.7);
        let u = solve_linear(&r, s, gamma, c).unwrap();
        let back = &(&apply_spectral(&u, s) + &u.scale(gamma)) + &u.derivative().scale(c);
        assert!((&back - &r).max_abs_coeff() <= 1e-12);
    }
}
