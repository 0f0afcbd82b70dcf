//! Anomalous-rotation spin model with Lorentzian history weights.
//!
//! A spin's Bloch vector undergoes a net rotation α between preparation and
//! measurement with relative weight W(α) = 1/(α² + γ²). Rotations that differ
//! by whole turns land on the same outcome, so outcome weights are the
//! wrapped sums S(θ) = Σₙ W(2nπ + θ). The two outcomes of a measurement
//! separated by relative angle θ correspond to net rotations θ and π + θ.
//!
//! S is evaluated by symmetric truncation to |n| ≤ N plus the midpoint
//! Euler–Maclaurin estimate of each tail,
//!
//! ```text
//! Σ_{n>N} f(n) = ∫_{N+½}^∞ f dx + f'(N+½)/24 + R,   |R| ≤ (√3/216) ∫_{N+½}^∞ |f'''| dx,
//! ```
//!
//! with f(x) = W(2πx ± θ). The remainder bound is what `truncation_radius`
//! inverts, so the requested tolerance is a certified bound on the
//! truncation error (rounding aside).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Truncation tolerance for the sums behind ratios, probabilities and
/// correlations. S(θ) ≥ 1/(2(cosh γ + 1))·sinh γ/γ stays far above this.
pub const PRECISE_TOLERANCE: f64 = 1e-16;

/// Width γ of the Lorentzian weight, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzParams {
    gamma: f64,
}

impl AnsatzParams {
    /// γ must be positive and finite; γ → 0 is only approached as a limit.
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(AnsatzParams { gamma })
        } else {
            Err(Error::InvalidGamma(gamma))
        }
    }

    pub fn gamma(self) -> f64 {
        self.gamma
    }
}

/// Alice's and Bob's analyser angles in the x–z plane, stored in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    alpha: f64,
    beta: f64,
}

impl MeasurementSettings {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for x in [alpha, beta] {
            if !x.is_finite() {
                return Err(Error::InvalidAngle(x));
            }
        }
        Ok(MeasurementSettings {
            alpha: normalize_angle(alpha),
            beta: normalize_angle(beta),
        })
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }

    pub fn beta(self) -> f64 {
        self.beta
    }

    /// θ = α − β.
    pub fn relative_angle(self) -> f64 {
        self.alpha - self.beta
    }
}

/// Maps any finite angle into [0, 2π).
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Low-order parts of 2π and π, for reductions that stay accurate near the
/// poles of S.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// Representative of ±θ mod 2π in [0, π]. S depends on θ only through this.
fn fold_angle(theta: f64) -> f64 {
    let k = (theta / TAU).round();
    ((-k).mul_add(TAU, theta) - k * TAU_LO).abs()
}

/// Representative of θ + π, folded like [`fold_angle`].
fn fold_opposite(theta: f64) -> f64 {
    (PI - fold_angle(theta)) + PI_LO
}

/// W(α) = 1/(α² + γ²).
pub fn lorentzian_weight(alpha: f64, params: AnsatzParams) -> f64 {
    1.0 / (alpha * alpha + params.gamma * params.gamma)
}

/// Compensated (Neumaier) running sum.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Upper bound on the Euler–Maclaurin remainder of both tails beyond `radius`.
///
/// Uses |d³/du³ (u² + γ²)⁻¹| ≤ 24/u⁵ and u ≥ 2πx − π on either tail.
pub fn remainder_bound(radius: u64) -> f64 {
    if radius == 0 {
        return f64::INFINITY;
    }
    let n = radius as f64;
    let per_side = (3f64.sqrt() / 216.0) * 6.0 / (TAU * TAU * n.powi(4));
    2.0 * per_side
}

/// Smallest radius whose remainder bound is within `tolerance`.
pub fn truncation_radius(tolerance: f64) -> Result<u64> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidTolerance(tolerance));
    }
    let estimate = (remainder_bound(1) / tolerance).powf(0.25).ceil().max(1.0) as u64;
    let mut n = estimate.saturating_sub(1).max(1);
    while remainder_bound(n) > tolerance {
        n += 1;
    }
    Ok(n)
}

/// Σ_{n>N} W(2πn + shift) estimated as integral plus first derivative
/// correction, for shift ∈ [−π, π].
fn tail_estimate(shift: f64, radius: u64, gamma: f64) -> f64 {
    let u = TAU * (radius as f64 + 0.5) + shift;
    let integral = (gamma / u).atan() / (TAU * gamma);
    let q = u * u + gamma * gamma;
    let derivative = -TAU * 2.0 * u / (q * q);
    integral + derivative / 24.0
}

/// Result of a wrapped sum evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrappedSum {
    pub value: f64,
    pub radius: u64,
    pub remainder_bound: f64,
}

/// S(θ) with the terms |n| ≤ `radius` summed explicitly and both tails
/// estimated analytically.
pub fn wrapped_sum_with_radius(theta: f64, params: AnsatzParams, radius: u64) -> WrappedSum {
    folded_sum(fold_angle(theta), params, radius)
}

fn folded_sum(t: f64, params: AnsatzParams, radius: u64) -> WrappedSum {
    let g = params.gamma;
    let mut acc = Accumulator::default();
    acc.add(tail_estimate(t, radius, g));
    acc.add(tail_estimate(-t, radius, g));
    for n in (1..=radius).rev() {
        let base = TAU * n as f64;
        acc.add(lorentzian_weight(base + t, params));
        acc.add(lorentzian_weight(base - t, params));
    }
    acc.add(lorentzian_weight(t, params));
    WrappedSum {
        value: acc.value(),
        radius,
        remainder_bound: remainder_bound(radius),
    }
}

/// S(θ, γ) = Σₙ W(2nπ + θ), accurate to `tolerance` (absolute).
pub fn wrapped_sum(theta: f64, params: AnsatzParams, tolerance: f64) -> Result<WrappedSum> {
    Ok(wrapped_sum_with_radius(
        theta,
        params,
        truncation_radius(tolerance)?,
    ))
}

/// Plain symmetric partial sum Σ_{|n|≤radius} W(2nπ + θ), no tail estimate.
pub fn truncated_sum(theta: f64, params: AnsatzParams, radius: u64) -> f64 {
    let t = fold_angle(theta);
    let mut acc = Accumulator::default();
    for n in (1..=radius).rev() {
        let base = TAU * n as f64;
        acc.add(lorentzian_weight(base + t, params));
        acc.add(lorentzian_weight(base - t, params));
    }
    acc.add(lorentzian_weight(t, params));
    acc.value()
}

fn precise_radius() -> u64 {
    static RADIUS: std::sync::OnceLock<u64> = std::sync::OnceLock::new();
    *RADIUS.get_or_init(|| truncation_radius(PRECISE_TOLERANCE).expect("positive constant"))
}

fn outcome_weights(theta: f64, params: AnsatzParams) -> (f64, f64) {
    let n = precise_radius();
    (
        folded_sum(fold_angle(theta), params, n).value,
        folded_sum(fold_opposite(theta), params, n).value,
    )
}

/// P(θ)/P(π − θ) = S(θ)/S(π + θ).
pub fn outcome_ratio(theta: f64, params: AnsatzParams) -> f64 {
    let (same, opposite) = outcome_weights(theta, params);
    same / opposite
}

/// The closed-form right-hand side of the outcome ratio,
/// (cos²(θ/2) + sin²(θ/2) tanh²(γ/2)) / (sin²(θ/2) + cos²(θ/2) tanh²(γ/2)).
pub fn outcome_ratio_formula(theta: f64, params: AnsatzParams) -> f64 {
    let t2 = (params.gamma / 2.0).tanh().powi(2);
    let c2 = (theta / 2.0).cos().powi(2);
    let s2 = (theta / 2.0).sin().powi(2);
    (c2 + s2 * t2) / (s2 + c2 * t2)
}

/// Probability that Bob's outcome is aligned with Alice's, S(θ)/(S(θ) + S(π + θ)).
pub fn aligned_probability(theta: f64, params: AnsatzParams) -> f64 {
    let (same, opposite) = outcome_weights(theta, params);
    same / (same + opposite)
}

/// E = P(a = b) − P(a ≠ b) for the entangled pair.
pub fn entangled_correlation(settings: MeasurementSettings, params: AnsatzParams) -> f64 {
    let (same, opposite) = outcome_weights(settings.relative_angle(), params);
    (same - opposite) / (same + opposite)
}

/// Analyser angles for a CHSH test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    /// a = 0, a′ = π/2, b = π/4, b′ = −π/4: the maximal-violation settings.
    pub const STANDARD: ChshAngles = ChshAngles {
        a: 0.0,
        a_prime: FRAC_PI_2,
        b: FRAC_PI_4,
        b_prime: -FRAC_PI_4,
    };
}

/// |E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)|.
pub fn chsh_value(angles: ChshAngles, params: AnsatzParams) -> Result<f64> {
    let e = |x: f64, y: f64| -> Result<f64> {
        Ok(entangled_correlation(
            MeasurementSettings::new(x, y)?,
            params,
        ))
    };
    let ChshAngles {
        a,
        a_prime,
        b,
        b_prime,
    } = angles;
    Ok((e(a, b)? + e(a, b_prime)? + e(a_prime, b)? - e(a_prime, b_prime)?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityCheck {
    pub entangled: f64,
    pub sequential: f64,
    pub residual: f64,
    pub holds: bool,
}

/// Compares the entangled-pair correlation with the sequential
/// single-particle prediction 2·P_aligned(α − β) − 1.
pub fn duality_check(
    settings: MeasurementSettings,
    params: AnsatzParams,
    tolerance: f64,
) -> Result<DualityCheck> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidTolerance(tolerance));
    }
    let entangled = entangled_correlation(settings, params);
    let sequential = 2.0 * aligned_probability(settings.relative_angle(), params) - 1.0;
    let residual = (entangled - sequential).abs();
    Ok(DualityCheck {
        entangled,
        sequential,
        residual,
        holds: residual <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornDeviation {
    pub theta: f64,
    pub gamma: f64,
    pub aligned: f64,
    pub born: f64,
    pub deviation: f64,
}

/// |P_aligned(θ, γ) − cos²(θ/2)| over a grid, γ-major then θ.
pub fn born_limit_scan(thetas: &[f64], gammas: &[f64]) -> Result<Vec<BornDeviation>> {
    let params: Vec<AnsatzParams> = gammas
        .iter()
        .map(|&g| AnsatzParams::new(g))
        .collect::<Result<_>>()?;
    let points: Vec<(AnsatzParams, f64)> = params
        .iter()
        .flat_map(|&p| thetas.iter().map(move |&t| (p, t)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(p, theta)| {
            let aligned = aligned_probability(theta, p);
            let born = (theta / 2.0).cos().powi(2);
            BornDeviation {
                theta,
                gamma: p.gamma,
                aligned,
                born,
                deviation: (aligned - born).abs(),
            }
        })
        .collect())
}

/// Largest deviation for each γ, in first-seen order.
pub fn max_deviation_by_gamma(rows: &[BornDeviation]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for row in rows {
        match out.iter_mut().find(|(g, _)| *g == row.gamma) {
            Some((_, m)) => *m = m.max(row.deviation),
            None => out.push((row.gamma, row.deviation)),
        }
    }
    out
}

/// `count` evenly spaced angles 2πk/count, k = 0..count.
pub fn theta_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| TAU * k as f64 / count as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64) -> AnsatzParams {
        AnsatzParams::new(g).unwrap()
    }

    #[test]
    fn fold_keeps_small_offsets_from_a_full_turn() {
        // reference 2π − t from 40-digit arithmetic
        let t = 6.276_902_121_872_406;
        let reference = 0.006_283_185_307_180_328;
        assert!((fold_angle(t) - reference).abs() <= 1e-18);
        assert!((TAU - t - reference).abs() > 1e-16);
        assert!((fold_opposite(0.0) - PI).abs() <= 4.0 * f64::EPSILON);
        assert_eq!(fold_angle(-1.0), 1.0);
    }

    #[test]
    fn params_reject_nonpositive_gamma() {
        for g in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(AnsatzParams::new(g).is_err());
        }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(lorentzian_weight(0.0, p(1.0)), 1.0);
        assert_eq!(lorentzian_weight(1.0, p(1.0)), 0.5);
        assert_eq!(
            lorentzian_weight(-0.7, p(0.3)),
            lorentzian_weight(0.7, p(0.3))
        );
        assert!(lorentzian_weight(0.5, p(0.3)) > lorentzian_weight(0.6, p(0.3)));
    }

    #[test]
    fn normalization_stays_in_range() {
        assert_eq!(normalize_angle(-1e-300), 0.0);
        assert!((normalize_angle(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(normalize_angle(TAU), 0.0);
    }

    #[test]
    fn radius_honours_tolerance() {
        for tol in [1e-6, 1e-12, 1e-16] {
            let n = truncation_radius(tol).unwrap();
            assert!(remainder_bound(n) <= tol);
            assert!(n == 1 || remainder_bound(n - 1) > tol);
        }
        assert!(truncation_radius(0.0).is_err());
        assert!(truncation_radius(-1.0).is_err());
    }

    #[test]
    fn ratio_and_probability_symmetry_points() {
        for g in [0.01, 0.5, 2.0] {
            assert!((outcome_ratio(FRAC_PI_2, p(g)) - 1.0).abs() < 1e-14);
            assert!((aligned_probability(FRAC_PI_2, p(g)) - 0.5).abs() < 1e-15);
            let s = MeasurementSettings::new(1.0 + FRAC_PI_2, 1.0).unwrap();
            assert!(entangled_correlation(s, p(g)).abs() < 1e-14);
        }
    }

    #[test]
    fn complementary_outcomes_sum_to_one() {
        for theta in [0.0, 0.4, 2.0, 5.9] {
            let sum = aligned_probability(theta, p(0.3)) + aligned_probability(theta + PI, p(0.3));
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_chsh_collapses() {
        let angles = ChshAngles {
            a: 0.4,
            a_prime: 0.4,
            b: 1.3,
            b_prime: 1.3,
        };
        let e = entangled_correlation(MeasurementSettings::new(0.4, 1.3).unwrap(), p(0.2));
        assert!((chsh_value(angles, p(0.2)).unwrap() - (2.0 * e).abs()).abs() < 1e-15);
    }

    #[test]
    fn duality_rejects_bad_tolerance() {
        let s = MeasurementSettings::new(0.0, 0.0).unwrap();
        assert!(duality_check(s, p(1.0), 0.0).is_err());
        let equal = duality_check(s, p(0.7), 1e-12).unwrap();
        assert!(equal.holds);
        assert!(equal.residual <= 1e-15);
    }

    #[test]
    fn scan_rejects_nonpositive_gamma() {
        assert!(born_limit_scan(&[0.0], &[0.1, 0.0]).is_err());
    }

    #[test]
    fn scan_order_and_summary() {
        let rows = born_limit_scan(&theta_grid(4), &[0.1, 0.05]).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].gamma, 0.1);
        assert_eq!(rows[4].gamma, 0.05);
        assert!(rows[1].deviation < 1e-15); // θ = π/2
        let summary = max_deviation_by_gamma(&rows);
        assert_eq!(summary.len(), 2);
        assert!(summary[0].1 > summary[1].1);
    }
}
