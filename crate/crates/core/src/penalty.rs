//! The fraction penalty and its proximal (thresholding) operator.
//!
//! For a shape parameter `a > 0` the scalar penalty is
//!
//! ```text
//! rho_a(t) = a|t| / (a|t| + 1)
//! ```
//!
//! which is concave on `[0, inf)` and tends to the `l0` indicator as `a` grows.
//! The proximal map
//!
//! ```text
//! prox(gamma) = argmin_beta (beta - gamma)^2 + lambda * rho_a(beta)
//! ```
//!
//! has a closed form: zero below a threshold `t*`, and a trigonometric root of
//! the stationarity cubic above it. The threshold switches formula at
//! `lambda = 1 / a^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::DenseVector;

/// Slack allowed on the arccos argument before it is treated as misuse.
pub const ARCCOS_CLAMP_SLACK: f64 = 1e-9;

/// Scalar fraction function `a|t| / (a|t| + 1)`.
pub fn rho(a: f64, t: f64) -> Result<f64> {
    require_positive("a", a)?;
    Ok(rho_unchecked(a, t))
}

#[inline]
pub(crate) fn rho_unchecked(a: f64, t: f64) -> f64 {
    let at = a * t.abs();
    at / (at + 1.0)
}

/// Separable penalty `P_a(x) = sum_i rho_a(x_i)`.
pub fn penalty(a: f64, x: &DenseVector) -> Result<f64> {
    require_positive("a", a)?;
    Ok(x.iter().map(|&t| rho_unchecked(a, t)).sum())
}

/// Shape `a` and weight `lambda` of a single proximal evaluation.
///
/// Inside the solvers `lambda` is the product of the regularisation weight and
/// the step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    a: f64,
    lambda: f64,
}

impl PenaltyParams {
    pub fn new(a: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            a: require_positive("a", a)?,
            lambda: require_positive("lambda", lambda)?,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `lambda = 1/a^2`, where the threshold switches formula.
    pub fn critical_lambda(&self) -> f64 {
        1.0 / (self.a * self.a)
    }

    pub fn threshold(&self) -> ThresholdRegime {
        threshold_value(*self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `lambda <= 1/a^2`: the proximal map is continuous at the threshold.
    SubCritical,
    /// `lambda > 1/a^2`: the proximal map jumps at the threshold.
    SuperCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRegime {
    pub regime: Regime,
    pub threshold: f64,
}

/// `t1 = lambda * a / 2`, the threshold for `lambda <= 1/a^2`.
pub fn subcritical_threshold(a: f64, lambda: f64) -> f64 {
    0.5 * lambda * a
}

/// `t2 = sqrt(lambda) - 1/(2a)`, the threshold for `lambda > 1/a^2`.
pub fn supercritical_threshold(a: f64, lambda: f64) -> f64 {
    lambda.sqrt() - 0.5 / a
}

pub fn threshold_value(p: PenaltyParams) -> ThresholdRegime {
    if p.lambda <= p.critical_lambda() {
        ThresholdRegime {
            regime: Regime::SubCritical,
            threshold: subcritical_threshold(p.a, p.lambda),
        }
    } else {
        ThresholdRegime {
            regime: Regime::SuperCritical,
            threshold: supercritical_threshold(p.a, p.lambda),
        }
    }
}

/// Raw argument `27 lambda a^2 / (4 (1 + a|gamma|)^3) - 1` of the arccos in the
/// root formula, before any clamping.
pub fn arccos_argument(p: PenaltyParams, gamma: f64) -> f64 {
    let m = 1.0 + p.a * gamma.abs();
    27.0 * p.lambda * p.a * p.a / (4.0 * m * m * m) - 1.0
}

/// Nonzero branch of the proximal map:
///
/// ```text
/// g(gamma) = sign(gamma) * ( (1 + a|gamma|)/3 * (1 + 2 cos(phi/3 - pi/3)) - 1 ) / a
/// phi      = arccos( 27 lambda a^2 / (4 (1 + a|gamma|)^3) - 1 )
/// ```
///
/// Only meaningful for `|gamma| >= t*`. The arccos argument is clamped into
/// `[-1, 1]` when it overshoots by at most [`ARCCOS_CLAMP_SLACK`]; further out
/// an [`Error::ArccosDomain`] is returned.
pub fn g_function(p: PenaltyParams, gamma: f64) -> Result<f64> {
    let arg = arccos_argument(p, gamma);
    if !(-1.0 - ARCCOS_CLAMP_SLACK..=1.0 + ARCCOS_CLAMP_SLACK).contains(&arg) {
        return Err(Error::ArccosDomain {
            argument: arg,
            gamma,
        });
    }
    Ok(g_clamped(p, gamma, arg))
}

#[inline]
fn g_clamped(p: PenaltyParams, gamma: f64, arg: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let magnitude = gamma.abs();
    let phi = arg.clamp(-1.0, 1.0).acos();
    let m = 1.0 + p.a * magnitude;
    let root = ((m / 3.0) * (1.0 + 2.0 * (phi / 3.0 - PI / 3.0).cos()) - 1.0) / p.a;
    // rounding near the continuous threshold can leave a tiny negative root
    let root = root.clamp(0.0, magnitude);
    if gamma > 0.0 {
        root
    } else {
        -root
    }
}

/// Global minimiser of `(beta - gamma)^2 + lambda * rho_a(beta)`.
///
/// Returns 0 for `|gamma| <= t*` (ties go to zero) and `g(gamma)` otherwise.
pub fn prox_scalar(p: PenaltyParams, gamma: f64) -> f64 {
    prox_with_threshold(p, threshold_value(p).threshold, gamma)
}

#[inline]
pub(crate) fn prox_with_threshold(p: PenaltyParams, threshold: f64, gamma: f64) -> f64 {
    if gamma.abs() <= threshold {
        0.0
    } else {
        // Above t* the argument is <= 1 up to rounding, so clamping is exact.
        g_clamped(p, gamma, arccos_argument(p, gamma))
    }
}

/// Componentwise proximal map (the thresholding operator `G`).
pub fn prox_vector(p: PenaltyParams, x: &DenseVector) -> DenseVector {
    let t = threshold_value(p).threshold;
    x.map(|gamma| prox_with_threshold(p, t, gamma))
}

/// `(beta - gamma)^2 + lambda * rho_a(beta)`.
pub fn scalar_objective(p: PenaltyParams, beta: f64, gamma: f64) -> f64 {
    let d = beta - gamma;
    d * d + p.lambda * rho_unchecked(p.a, beta)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    macro_rules! assert_close {
        ($left:expr, $right:expr, $tol:expr) => {{
            let (l, r): (f64, f64) = ($left, $right);
            assert!((l - r).abs() <= $tol, "{} vs {} (tol {})", l, r, $tol);
        }};
    }

    fn params(a: f64, lambda: f64) -> PenaltyParams {
        PenaltyParams::new(a, lambda).unwrap()
    }

    /// Brute-force minimiser of the scalar objective on a uniform grid over
    /// `[min(0, gamma) - pad, max(0, gamma) + pad]`.
    fn grid_argmin(p: PenaltyParams, gamma: f64, step: f64) -> (f64, f64) {
        let lo = gamma.min(0.0) - 0.1;
        let hi = gamma.max(0.0) + 0.1;
        let count = ((hi - lo) / step).ceil() as usize;
        let mut best = (0.0, scalar_objective(p, 0.0, gamma));
        for i in 0..=count {
            let beta = lo + i as f64 * step;
            let value = scalar_objective(p, beta, gamma);
            if value < best.1 {
                best = (beta, value);
            }
        }
        best
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(rho(1.0, 1.0).unwrap(), 0.5);
        assert_close!(rho(1000.0, 0.5).unwrap(), 500.0 / 501.0, 1e-15);
        assert_close!(rho(1000.0, 0.5).unwrap(), 0.998004, 1e-6);
        assert_eq!(rho(2.0, -0.3).unwrap(), rho(2.0, 0.3).unwrap());
    }

    #[test]
    fn rho_rejects_nonpositive_shape() {
        assert!(matches!(rho(0.0, 1.0), Err(Error::InvalidParameter { .. })));
        assert!(rho(-1.0, 1.0).is_err());
        assert!(penalty(f64::NAN, &DenseVector::zeros(2)).is_err());
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty(1.0, &DenseVector::zeros(4)).unwrap(), 0.0);
        let x = DenseVector::from_vec(vec![1.0, -1.0, 0.0]);
        assert_eq!(penalty(1.0, &x).unwrap(), 1.0);
        let x = DenseVector::from_vec(vec![0.5, 0.25]);
        assert_close!(penalty(2.0, &x).unwrap(), 0.5 + 1.0 / 3.0, 1e-15);
    }

    #[test]
    fn penalty_params_validation() {
        assert!(PenaltyParams::new(1.0, 0.0).is_err());
        assert!(PenaltyParams::new(0.0, 1.0).is_err());
        assert!(PenaltyParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = threshold_value(params(1.0, 0.25));
        assert_eq!(t.regime, Regime::SubCritical);
        assert_eq!(t.threshold, 0.125);

        let t = threshold_value(params(1.0, 1.0));
        assert_eq!(t.threshold, 0.5);
        assert_eq!(supercritical_threshold(1.0, 1.0), 0.5);

        let t = threshold_value(params(2.0, 4.0));
        assert_eq!(t.regime, Regime::SuperCritical);
        assert_eq!(t.threshold, 1.75);
    }

    #[test]
    fn threshold_formulas_meet_at_critical_lambda() {
        for a in [0.5, 1.0, 2.0, 5.0] {
            let lambda = 1.0 / (a * a);
            let t1 = subcritical_threshold(a, lambda);
            let t2 = supercritical_threshold(a, lambda);
            assert!((t1 - t2).abs() <= 1e-12, "a={a}: {t1} vs {t2}");
            assert_close!(t1, 0.5 / a, 1e-15);
        }
    }

    #[test]
    fn g_matches_grid_oracle() {
        let p = params(1.0, 0.25);
        let g = g_function(p, 2.0).unwrap();
        assert!(g > 0.0 && g < 2.0);
        let (beta, _) = grid_argmin(p, 2.0, 1e-6);
        assert_close!(g, beta, 1e-6);
        assert_eq!(g_function(p, -2.0).unwrap(), -g);
    }

    #[test]
    fn g_at_coincident_threshold_is_zero() {
        let p = params(1.0, 1.0);
        assert_eq!(arccos_argument(p, 0.5), 1.0);
        assert_close!(g_function(p, 0.5).unwrap(), 0.0, 1e-15);
        let (beta, _) = grid_argmin(p, 0.5, 1e-6);
        assert_close!(beta, 0.0, 1e-6);
    }

    #[test]
    fn g_reports_domain_misuse() {
        // far below t* = 1.75 the cubic has no trigonometric root
        let p = params(2.0, 4.0);
        assert!(arccos_argument(p, 0.1) > 1.0 + ARCCOS_CLAMP_SLACK);
        assert!(matches!(
            g_function(p, 0.1),
            Err(Error::ArccosDomain { .. })
        ));
        assert!(g_function(p, 0.0).is_err());
    }

    #[test]
    fn prox_examples() {
        let p = params(1.0, 0.25);
        assert_eq!(prox_scalar(p, 0.1), 0.0);
        assert_eq!(prox_scalar(p, 0.0), 0.0);
        assert_eq!(prox_scalar(p, 0.125), 0.0);

        // lambda > 1/a^2: super-critical branch
        let p = params(3.0, 0.5);
        assert_eq!(p.threshold().regime, Regime::SuperCritical);
        let (beta, _) = grid_argmin(p, 1.2, 1e-6);
        assert_close!(prox_scalar(p, 1.2), beta, 1e-5);
    }

    #[test]
    fn prox_vector_examples() {
        let p = params(1.0, 0.25);
        assert_eq!(
            prox_vector(p, &DenseVector::zeros(3)),
            DenseVector::zeros(3)
        );

        let x = DenseVector::from_vec(vec![2.0, -2.0, 0.1]);
        let out = prox_vector(p, &x);
        let g2 = g_function(p, 2.0).unwrap();
        assert_eq!(out.as_slice(), &[g2, -g2, 0.0]);

        let p = params(2.0, 4.0);
        let x = DenseVector::from_vec(vec![1.75, -1.0, 0.3, -1.75]);
        assert_eq!(prox_vector(p, &x), DenseVector::zeros(4));
    }

    #[test]
    fn scalar_objective_examples() {
        assert_eq!(scalar_objective(params(1.0, 1.0), 0.0, 0.0), 0.0);
        assert_eq!(scalar_objective(params(1.0, 1.0), 1.0, 0.0), 1.5);
        assert_close!(scalar_objective(params(2.0, 0.5), 0.5, 1.0), 0.5, 1e-15);
    }

    #[test]
    fn rho_interpolates_indicator() {
        for t in [0.01, 0.3, -2.0] {
            let mut prev = 0.0;
            for a in [1.0, 10.0, 1e2, 1e3, 1e4] {
                let value = rho(a, t).unwrap();
                assert!(value >= 1.0 - 1.0 / (a * f64::abs(t)));
                assert!(value > prev && value < 1.0);
                prev = value;
            }
        }
    }

    #[test]
    fn threshold_order_on_log_grid() {
        // t2 <= t1 everywhere, with equality only at lambda = 1/a^2
        for i in 0..=40 {
            for j in 0..=40 {
                let a = 10f64.powf(-1.0 + i as f64 / 20.0);
                let lambda = 10f64.powf(-1.0 + j as f64 / 20.0);
                let t1 = subcritical_threshold(a, lambda);
                let t2 = supercritical_threshold(a, lambda);
                assert!(t2 <= t1 + 1e-12, "a={a} lambda={lambda}");
            }
        }
    }

    fn log_uniform() -> impl Strategy<Value = f64> {
        (-1.0f64..=1.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #[test]
        fn prox_is_odd(a in log_uniform(), lambda in log_uniform(), gamma in -5.0f64..5.0) {
            let p = params(a, lambda);
            prop_assert_eq!(prox_scalar(p, -gamma), -prox_scalar(p, gamma));
        }

        #[test]
        fn prox_shrinks(a in log_uniform(), lambda in log_uniform(), gamma in -5.0f64..5.0) {
            let p = params(a, lambda);
            let out = prox_scalar(p, gamma);
            prop_assert!(out.abs() <= gamma.abs());
            prop_assert!(out == 0.0 || out.signum() == gamma.signum());
        }

        #[test]
        fn prox_thresholds(a in log_uniform(), lambda in log_uniform(), frac in 0.0f64..=1.0, above in 1e-9f64..3.0) {
            let p = params(a, lambda);
            let t = p.threshold().threshold;
            prop_assert_eq!(prox_scalar(p, frac * t), 0.0);
            prop_assert_eq!(prox_scalar(p, -frac * t), 0.0);
            prop_assert!(prox_scalar(p, t + above) != 0.0);
        }

        #[test]
        fn arccos_argument_in_domain_above_threshold(a in log_uniform(), lambda in log_uniform(), above in 0.0f64..5.0) {
            let p = params(a, lambda);
            let arg = arccos_argument(p, p.threshold().threshold + above);
            prop_assert!((-1.0..=1.0 + 1e-12).contains(&arg), "arg = {}", arg);
        }

        #[test]
        fn prox_beats_coarse_grid(a in log_uniform(), lambda in log_uniform(), gamma in -5.0f64..5.0) {
            let p = params(a, lambda);
            let (_, best) = grid_argmin(p, gamma, 1e-3);
            prop_assert!(scalar_objective(p, prox_scalar(p, gamma), gamma) <= best + 1e-9);
        }
    }
}
