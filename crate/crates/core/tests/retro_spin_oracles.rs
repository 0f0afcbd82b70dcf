mod common;

use std::f64::consts::{PI, SQRT_2, TAU};

use allatonce_core::retro_spin::{
    aligned_probability, born_limit_scan, chsh_value, duality_check, entangled_correlation,
    max_deviation_by_gamma, outcome_ratio, outcome_ratio_formula, theta_grid, truncated_sum,
    truncation_radius, wrapped_sum, wrapped_sum_with_radius, AnsatzParams, ChshAngles,
    MeasurementSettings, DEFAULT_TOLERANCE,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::wrapped_closed_form;

fn params(gamma: f64) -> AnsatzParams {
    AnsatzParams::new(gamma).unwrap()
}

fn chsh(gamma: f64) -> f64 {
    chsh_value(ChshAngles::STANDARD, params(gamma)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The partial sums increase to the closed form, missing at most the
    /// integral of the two tails.
    #[test]
    fn closed_form_matches_partial_sums(theta in -10.0..10.0f64, gamma in 0.05..3.0f64) {
        let closed = wrapped_closed_form(theta, gamma);
        for radius in [10u64, 100, 1000] {
            let partial = truncated_sum(theta, params(gamma), radius);
            let tail_cap = 1.0 / (PI * (TAU * radius as f64 - PI));
            let gap = closed - partial;
            prop_assert!(gap >= -1e-12 * closed, "partial sum overshoots: {gap:e}");
            prop_assert!(gap <= tail_cap + 1e-12 * closed, "gap {gap:e} > {tail_cap:e}");
        }
    }

    #[test]
    fn wrapped_sum_meets_tolerance(theta in -10.0..10.0f64, gamma in 0.05..3.0f64) {
        let s = wrapped_sum(theta, params(gamma), DEFAULT_TOLERANCE).unwrap();
        let closed = wrapped_closed_form(theta, gamma);
        prop_assert!((s.value - closed).abs() <= DEFAULT_TOLERANCE + 4.0 * f64::EPSILON * closed);
    }

    #[test]
    fn periodic_and_even(theta in -10.0..10.0f64, gamma in 0.05..3.0f64, k in -3i32..3) {
        let p = params(gamma);
        let s = wrapped_sum(theta, p, DEFAULT_TOLERANCE).unwrap().value;
        let shifted = wrapped_sum(theta + TAU * k as f64, p, DEFAULT_TOLERANCE).unwrap().value;
        let mirrored = wrapped_sum(-theta, p, DEFAULT_TOLERANCE).unwrap().value;
        let tol = 1e-12 * s.max(1.0);
        prop_assert!((s - shifted).abs() <= tol);
        prop_assert!((s - mirrored).abs() <= tol);
    }

    #[test]
    fn doubling_the_radius_changes_little(theta in 0.0..TAU, gamma in 0.05..3.0f64) {
        let n = truncation_radius(DEFAULT_TOLERANCE).unwrap();
        let a = wrapped_sum_with_radius(theta, params(gamma), n).value;
        let b = wrapped_sum_with_radius(theta, params(gamma), 2 * n).value;
        prop_assert!((a - b).abs() <= DEFAULT_TOLERANCE + 4.0 * f64::EPSILON * a);
    }

    #[test]
    fn correlation_is_bounded_and_matches_oracle(
        alpha in 0.0..TAU,
        beta in 0.0..TAU,
        gamma in 0.01..3.0f64,
    ) {
        let e = entangled_correlation(MeasurementSettings::new(alpha, beta).unwrap(), params(gamma));
        prop_assert!(e.abs() <= 1.0);
        prop_assert!((e - (alpha - beta).cos() / gamma.cosh()).abs() <= 1e-10);
    }

    #[test]
    fn aligned_probability_matches_oracle(theta in 0.0..TAU, gamma in 0.01..3.0f64) {
        let p = aligned_probability(theta, params(gamma));
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - (0.5 + theta.cos() / (2.0 * gamma.cosh()))).abs() <= 1e-10);
    }
}

#[test]
fn outcome_ratio_identity_on_grid() {
    let mut worst = 0.0f64;
    for &gamma in &[0.1, 0.5, 1.0, 2.0] {
        for theta in theta_grid(64) {
            let lhs = outcome_ratio(theta, params(gamma));
            let rhs = outcome_ratio_formula(theta, params(gamma));
            worst = worst.max((lhs - rhs).abs());
        }
    }
    assert!(worst <= 1e-10, "worst residual {worst:e}");
}

#[test]
fn reference_values() {
    let s = wrapped_sum(PI, params(1.0), DEFAULT_TOLERANCE)
        .unwrap()
        .value;
    assert!((s - 0.231058578630).abs() <= 1e-11, "S(π, 1) = {s}");

    let coth2 = 1.0 / 0.5f64.tanh().powi(2);
    assert!((outcome_ratio(0.0, params(1.0)) - coth2).abs() <= 1e-10);
    assert!((outcome_ratio(0.0, params(1.0)) - 4.682694377).abs() <= 1e-8);
    assert!((outcome_ratio(PI, params(1.0)) - 0.213552267).abs() <= 1e-8);
}

#[test]
fn small_gamma_recovers_quantum_values() {
    let p = aligned_probability(PI / 3.0, params(1e-3));
    assert!((p - 0.75).abs() <= 1e-6, "P_aligned = {p}");

    let e = entangled_correlation(
        MeasurementSettings::new(PI / 3.0, 0.0).unwrap(),
        params(1e-3),
    );
    assert!((e - 0.5).abs() <= 1e-6, "E = {e}");

    let s = chsh(1e-6);
    assert!((s - 2.0 * SQRT_2).abs() <= 1e-6, "CHSH = {s}");
}

#[test]
fn chsh_at_unit_gamma() {
    let s = chsh(1.0);
    assert!((s - 1.832974286).abs() <= 1e-8, "CHSH = {s}");
    assert!(s < 2.0);
}

#[test]
fn chsh_decreases_and_crosses_two_once() {
    let gammas: Vec<f64> = (1..=300).map(|k| k as f64 * 0.01).collect();
    let values: Vec<f64> = gammas.iter().map(|&g| chsh(g)).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    for (&g, &v) in gammas.iter().zip(&values) {
        if g < 0.88 {
            assert!(v > 2.0, "CHSH({g}) = {v}");
        }
    }

    let (mut lo, mut hi) = (0.5, 1.5);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if chsh(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let threshold = SQRT_2.acosh();
    assert!(
        (lo - threshold).abs() <= 1e-8,
        "threshold {lo} vs {threshold}"
    );
}

#[test]
fn born_deviation_shrinks_quadratically() {
    let rows = born_limit_scan(&theta_grid(256), &[0.1, 0.05]).unwrap();
    let maxima = max_deviation_by_gamma(&rows);
    assert_eq!(maxima.len(), 2);
    let (d1, d2) = (maxima[0].1, maxima[1].1);

    let oracle = |g: f64| 0.5 * (1.0 - 1.0 / g.cosh());
    assert!((d1 - oracle(0.1)).abs() <= 1e-10);
    assert!((d1 - 0.00248962552).abs() <= 1e-10);
    assert!(d1 <= 0.1 * 0.1);
    assert!((d2 - 0.000624349620).abs() <= 1e-10);
    let ratio = d1 / d2;
    assert!((ratio - 4.0).abs() <= 0.05, "ratio {ratio}");
}

#[test]
fn duality_holds_on_random_settings() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let settings =
            MeasurementSettings::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)).unwrap();
        let p = params(rng.gen_range(0.01..=2.0));
        let check = duality_check(settings, p, 1e-10).unwrap();
        assert!(check.holds);
        worst = worst.max(check.residual);
    }
    assert!(worst <= 1e-10);
}

#[test]
fn rejects_bad_inputs() {
    assert!(AnsatzParams::new(0.0).is_err());
    assert!(AnsatzParams::new(-1.0).is_err());
    assert!(AnsatzParams::new(f64::NAN).is_err());
    assert!(MeasurementSettings::new(f64::INFINITY, 0.0).is_err());
    assert!(truncation_radius(0.0).is_err());
}
