use std::f64::consts::PI;

use fracperiodic::frac_op::kernel_with_images;
use fracperiodic::{
    apply_kernel, apply_spectral, check_orthogonality, check_poincare, check_zero_mean, energy_identity,
    kernel_k, normalization_c1s, solve_linear, FracOrder, Nonlinearity, PeriodicFunction, QuadratureConfig,
};
use proptest::prelude::*;

fn order(s: f64) -> FracOrder {
    FracOrder::new(s).unwrap()
}

/// Trig polynomial with `n_modes` stored modes and coefficients in `[-1, 1]`.
fn trig_poly(max_modes: usize) -> impl Strategy<Value = PeriodicFunction> {
    (1..=max_modes).prop_flat_map(|n| {
        (-1.0..1.0f64, prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(-1.0..1.0f64, n))
            .prop_map(|(a0, a, b)| PeriodicFunction::new(a0, a, b).unwrap())
    })
}

fn standard_order() -> impl Strategy<Value = FracOrder> {
    prop::sample::select(vec![0.55, 0.75, 0.9]).prop_map(order)
}

fn any_order() -> impl Strategy<Value = FracOrder> {
    (0.05..0.95f64).prop_map(order)
}

proptest! {
    #[test]
    fn synthesize_then_analyze_is_identity(f in trig_poly(16), extra in 0usize..3) {
        let m = 2 * f.n_modes() + 1 + extra * 7;
        let back = PeriodicFunction::analyze(&f.synthesize(m).unwrap(), f.n_modes()).unwrap();
        prop_assert!((&back - &f).max_abs_coeff() <= 1e-12);
    }

    #[test]
    fn derivative_has_zero_mean(f in trig_poly(16)) {
        prop_assert_eq!(f.derivative().mean(), 0.0);
    }

    #[test]
    fn hs_energy_vanishes_only_on_constants(f in trig_poly(8), s in any_order()) {
        let e = f.hs_energy(s.value());
        prop_assert!(e >= 0.0);
        let constant = f.without_mean().max_abs_coeff() < 1e-14;
        prop_assert_eq!(e == 0.0, constant);
    }

    #[test]
    fn poincare_never_violated(f in trig_poly(16), s in any_order()) {
        let (lhs, rhs) = check_poincare(&f.without_mean(), s);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn spectral_operator_is_linear(
        f in trig_poly(12),
        g in trig_poly(12),
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
        s in any_order(),
    ) {
        let n = f.n_modes().max(g.n_modes());
        let (f, g) = (f.resized(n), g.resized(n));
        let combined = apply_spectral(&(&f.scale(alpha) + &g.scale(beta)), s);
        let separate = &apply_spectral(&f, s).scale(alpha) + &apply_spectral(&g, s).scale(beta);
        let scale = 1.0 + combined.max_abs_coeff();
        prop_assert!((&combined - &separate).max_abs_coeff() <= 1e-13 * scale);
    }

    #[test]
    fn spectral_operator_has_exact_zero_mean(f in trig_poly(16), s in any_order()) {
        prop_assert_eq!(apply_spectral(&f, s).mean(), 0.0);
        prop_assert_eq!(check_zero_mean(&f, s), 0.0);
    }

    #[test]
    fn operator_is_orthogonal_to_derivative(f in trig_poly(16), s in any_order()) {
        let scale = 1.0 + apply_spectral(&f, s).l2_norm() * f.derivative().l2_norm();
        prop_assert!(check_orthogonality(&f, s) <= 1e-12 * scale);
    }

    #[test]
    fn kernel_is_positive_and_symmetric(z in 1e-3..(2.0 * PI - 1e-3), s in any_order()) {
        // K grows like z^{-1-2s} at the origin, so ask for relative accuracy.
        let tol = 1e-13 * kernel_with_images(z, s, 8).unwrap().value;
        let k = kernel_k(z, s, tol).unwrap().value;
        let mirrored = kernel_k(2.0 * PI - z, s, tol).unwrap().value;
        prop_assert!(k > 0.0);
        prop_assert!((k - mirrored).abs() <= 1e-12 * k);
    }

    #[test]
    fn normalization_matches_gamma_closed_form(s in any_order()) {
        // C(1,s) = s 4^s Γ(1/2 + s) / (√π Γ(1 − s))
        let sv = s.value();
        let closed = sv * 4f64.powf(sv) * libm::tgamma(0.5 + sv) / (PI.sqrt() * libm::tgamma(1.0 - sv));
        let c = normalization_c1s(s);
        prop_assert!((c - closed).abs() <= 1e-9 * closed, "{c} vs {closed}");
    }

    #[test]
    fn doubling_images_stays_within_tail_bound(z in 1e-2..(2.0 * PI - 1e-2), s in any_order(), k in 1usize..7) {
        let images = 1 << k;
        let coarse = kernel_with_images(z, s, images).unwrap();
        let fine = kernel_with_images(z, s, 2 * images).unwrap();
        prop_assert!((coarse.value - fine.value).abs() <= coarse.tail_bound + fine.tail_bound);
    }

    #[test]
    fn composition_is_refinement_stable(
        a in prop::collection::vec(-0.3..0.3f64, 3),
        b in prop::collection::vec(-0.3..0.3f64, 3),
        r in 1usize..3,
    ) {
        let modes: Vec<(usize, f64, f64)> = (0..3).map(|k| (k + 1, a[k], b[k])).collect();
        let f = PeriodicFunction::from_modes(16, 1.0, &modes).unwrap();
        let phi = Nonlinearity::from_pairs(&[(1.0, 2.0), (-0.5, 3.0), (2.0, 0.0)]);
        let coarse = f.compose(&phi, r).unwrap();
        let fine = f.compose(&phi, 2 * r).unwrap();
        prop_assert!((&coarse - &fine).max_abs_coeff() <= 1e-8);
    }

    #[test]
    fn linear_solve_residual(
        r in trig_poly(16),
        s in any_order(),
        gamma in 0.01..5.0f64,
        c in -3.0..3.0f64,
    ) {
        let u = solve_linear(&r, s, gamma, c).unwrap();
        let back = &(&apply_spectral(&u, s) + &u.scale(gamma)) + &u.derivative().scale(c);
        prop_assert!((&back - &r).max_abs_coeff() <= 1e-12);
    }

    #[test]
    fn diagonal_linear_solve_is_monotone(r in trig_poly(16), s in any_order(), gamma in 0.01..5.0f64) {
        let u = solve_linear(&r, s, gamma, 0.0).unwrap();
        let bound = |x: f64| x.abs() / gamma * (1.0 + 1e-14);
        prop_assert!(u.a0().abs() <= bound(r.a0()));
        for n in 1..=r.n_modes() {
            let (ua, ub) = u.mode(n);
            let (ra, rb) = r.mode(n);
            prop_assert!(ua.abs() <= bound(ra) && ub.abs() <= bound(rb));
        }
    }

    #[test]
    fn solve_then_apply_is_identity_on_mean_zero(r in trig_poly(16), s in any_order(), c in -3.0..3.0f64) {
        let r = r.without_mean();
        let u = solve_linear(&r, s, 0.0, c).unwrap();
        let back = &apply_spectral(&u, s) + &u.derivative().scale(c);
        prop_assert!((&back - &r).max_abs_coeff() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn kernel_form_matches_spectral_form(f in trig_poly(16), s in standard_order()) {
        let q = QuadratureConfig::default();
        let spectral = apply_spectral(&f, s);
        let tol = (10.0 * q.abs_tol).max(1e-6);
        for j in 0..33 {
            let t = 2.0 * PI * j as f64 / 33.0;
            let k = apply_kernel(&f, t, s, &q).unwrap();
            prop_assert!((k - spectral.eval(t)).abs() <= tol, "t = {t}: {k} vs {}", spectral.eval(t));
        }
    }

    #[test]
    fn energy_identity_balances(
        f in trig_poly(8),
        s in prop::sample::select(vec![0.6, 0.75, 0.9]).prop_map(order),
        a in 0.1..3.0f64,
        len in 0.1..3.0f64,
    ) {
        let q = QuadratureConfig::default();
        let e = energy_identity(&f, a, a + len, s, &q).unwrap();
        prop_assert!(e.residual() <= (50.0 * q.abs_tol).max(1e-3), "{e:?}");
    }

    #[test]
    fn energy_lhs_is_additive(
        f in trig_poly(6),
        a in 0.1..2.0f64,
        l1 in 0.1..2.0f64,
        l2 in 0.1..2.0f64,
    ) {
        let (s, q) = (order(0.75), QuadratureConfig::default());
        let (b, c) = (a + l1, a + l1 + l2);
        let whole = energy_identity(&f, a, c, s, &q).unwrap();
        let left = energy_identity(&f, a, b, s, &q).unwrap();
        let right = energy_identity(&f, b, c, s, &q).unwrap();
        prop_assert!((whole.lhs - left.lhs - right.lhs).abs() <= 1e-8 * (1.0 + whole.lhs.abs()));
        prop_assert!((whole.rhs_total - left.rhs_total - right.rhs_total).abs() <= 1e-3);
    }
}
