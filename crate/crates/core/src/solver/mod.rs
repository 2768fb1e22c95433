//! Iterative thresholding solvers for `min ||F(x) x - b||^2 + penalty(x)`.
//!
//! All three algorithms share one loop. Each iteration
//!
//! 1. materialises `F(x^k)` and estimates `||F(x^k)||_2^2` by power iteration,
//! 2. sets `mu_k = (1 - eps) / ||F(x^k)||_2^2`,
//! 3. takes the Landweber step `z = x^k + mu_k F(x^k)^T (b - F(x^k) x^k)`,
//! 4. thresholds `z` with the algorithm's rule.
//!
//! The rules differ only in step 4:
//!
//! - IFTA: fraction-penalty prox with the adaptive weight from [`adaptive_lambda`],
//! - ISTA: soft thresholding at `|z|_(r+1)`,
//! - IHTA: keep the `r` largest entries.
//!
//! Iteration stops when `||x^k - x^(k-1)|| / ||x^k|| <= tol` (absolute change
//! when `x^k = 0`) or after `max_iter` steps.

mod rules;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use rules::{
    adaptive_lambda, keep_top_r, kth_magnitude, magnitude_order, soft_threshold, AdaptiveLambda,
    LambdaRegime,
};

use crate::error::{require_positive, Error, Result};
use crate::operator::{landweber_step_with, QuasiLinearOperator};
use crate::penalty::{self, prox_with_threshold, threshold_value, PenaltyParams};
use crate::spectral::PowerIteration;
use crate::DenseVector;

pub const DEFAULT_A: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ifta,
    Ista,
    Ihta,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ifta, Algorithm::Ista, Algorithm::Ihta];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ifta => "ifta",
            Algorithm::Ista => "ista",
            Algorithm::Ihta => "ihta",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ifta" => Ok(Algorithm::Ifta),
            "ista" => Ok(Algorithm::Ista),
            "ihta" => Ok(Algorithm::Ihta),
            other => Err(Error::Malformed(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Fraction-penalty shape `a`.
    pub a: f64,
    /// Sparsity prior `r`: the number of entries the adaptive rules aim to keep.
    pub sparsity: usize,
    /// Step-size margin, `mu = (1 - epsilon) / ||F||_2^2`.
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(skip)]
    pub power: PowerIteration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Ifta,
            a: DEFAULT_A,
            sparsity: 1,
            epsilon: DEFAULT_EPSILON,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            power: PowerIteration::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, sparsity: usize) -> Self {
        Self {
            algorithm,
            sparsity,
            ..Self::default()
        }
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        require_positive("a", self.a)?;
        require_positive("tol", self.tol)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                expected: "0 < epsilon < 1",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                expected: ">= 1",
            });
        }
        if self.sparsity < 1 || self.sparsity >= n {
            return Err(Error::SparsityOutOfRange {
                r: self.sparsity,
                lower: 1,
                n,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIter,
}

/// Regularisation weight used at one iteration. `regime` is `None` for the
/// baselines, whose weight is not chosen by the two-regime rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaStep {
    pub lambda: f64,
    pub regime: Option<LambdaRegime>,
}

/// One line of the per-iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub lambda: f64,
    pub regime: Option<LambdaRegime>,
    pub mu: f64,
    pub t_star: f64,
    /// Nonzeros of the new iterate `x^k`.
    pub nnz: usize,
    pub rel_change: f64,
    /// `||F(x^(k-1)) x^(k-1) - b||_2`, the residual the step started from.
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub algorithm: Algorithm,
    #[serde(with = "crate::serde_vector")]
    pub solution: DenseVector,
    pub iterations: usize,
    pub termination: Termination,
    pub final_relative_change: f64,
    /// `||F(x) x - b||^2 + lambda * penalty(x)` at the returned `x`, using the
    /// last `lambda`. The penalty is `P_a` for IFTA, `||x||_1` for ISTA and
    /// absent for IHTA.
    pub objective: f64,
    /// Last regularisation weight used.
    pub lambda: f64,
    pub residual_norm: f64,
    /// `||x - T(x)||_2` where `T` is one more iteration of the same solver.
    pub fixed_point_residual: f64,
    pub lambda_trace: Vec<LambdaStep>,
    /// Iterations whose power iteration hit its budget before converging.
    pub degraded_spectral_estimates: usize,
}

impl RecoveryResult {
    pub fn nnz(&self) -> usize {
        count_nonzero(&self.solution)
    }
}

fn count_nonzero(x: &DenseVector) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

struct Step {
    next: DenseVector,
    lambda: f64,
    regime: Option<LambdaRegime>,
    mu: f64,
    threshold: f64,
    residual_norm: f64,
    spectral_converged: bool,
}

/// Per-solve mutable state: warm start for power iteration and the smallest
/// positive IFTA weight seen so far.
#[derive(Clone)]
struct Stepper<'a> {
    op: &'a dyn QuasiLinearOperator,
    b: &'a DenseVector,
    cfg: &'a SolverConfig,
    warm_start: Option<DenseVector>,
    min_lambda: Option<f64>,
}

impl<'a> Stepper<'a> {
    fn new(op: &'a dyn QuasiLinearOperator, b: &'a DenseVector, cfg: &'a SolverConfig) -> Self {
        Self {
            op,
            b,
            cfg,
            warm_start: None,
            min_lambda: None,
        }
    }

    fn step(&mut self, x: &DenseVector) -> Result<Step> {
        let cfg = self.cfg;
        let f = self.op.matrix_unchecked(x);
        let estimate = match &self.warm_start {
            Some(v) => cfg.power.estimate_from(&f, v)?,
            None => cfg.power.estimate(&f)?,
        };
        let mu = (1.0 - cfg.epsilon) / estimate.value;
        self.warm_start = Some(estimate.vector);
        let (z, residual) = landweber_step_with(&f, x, self.b, mu);
        let residual_norm = residual.norm();
        let order = magnitude_order(&z);
        let r = cfg.sparsity;

        let (next, lambda, regime, threshold) = match cfg.algorithm {
            Algorithm::Ifta => {
                let (next, lambda, regime, t) = self.fraction_threshold(&z, &order, mu)?;
                (next, lambda, Some(regime), t)
            }
            Algorithm::Ista => {
                let tau = kth_magnitude(&z, &order, r + 1);
                (soft_threshold(&z, tau), 2.0 * tau / mu, None, tau)
            }
            Algorithm::Ihta => {
                let t = kth_magnitude(&z, &order, r + 1);
                (keep_top_r(&z, r), 0.0, None, t)
            }
        };

        Ok(Step {
            next,
            lambda,
            regime,
            mu,
            threshold,
            residual_norm,
            spectral_converged: estimate.converged,
        })
    }

    fn fraction_threshold(
        &mut self,
        z: &DenseVector,
        order: &[usize],
        mu: f64,
    ) -> Result<(DenseVector, f64, LambdaRegime, f64)> {
        let (a, r) = (self.cfg.a, self.cfg.sparsity);
        let choice = rules::adaptive_lambda_ordered(a, mu, z, order, r);
        if !choice.is_degenerate() {
            self.min_lambda = Some(
                self.min_lambda
                    .map_or(choice.lambda, |m| m.min(choice.lambda)),
            );
            let p = PenaltyParams::new(a, choice.lambda * mu)?;
            let next = z.map(|g| prox_with_threshold(p, choice.threshold, g));
            return Ok((next, choice.lambda, choice.regime, choice.threshold));
        }
        // z is already r-sparse
        let top = keep_top_r(z, r);
        match self.min_lambda {
            Some(lambda) => {
                let p = PenaltyParams::new(a, lambda * mu)?;
                let t = threshold_value(p).threshold;
                let next = top.map(|g| prox_with_threshold(p, t, g));
                Ok((next, lambda, LambdaRegime::Fallback, t))
            }
            None => Ok((top, 0.0, LambdaRegime::Fallback, 0.0)),
        }
    }
}

fn check_inputs(
    op: &dyn QuasiLinearOperator,
    b: &DenseVector,
    cfg: &SolverConfig,
    x: &DenseVector,
) -> Result<()> {
    let (m, n) = op.dims();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            what: "measurement vector",
            expected: m,
            found: b.len(),
        });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            what: "initial iterate",
            expected: n,
            found: x.len(),
        });
    }
    cfg.validate(n)
}

/// Run the solver selected by `cfg.algorithm` from `x_init`.
pub fn solve(
    op: &dyn QuasiLinearOperator,
    b: &DenseVector,
    cfg: &SolverConfig,
    x_init: &DenseVector,
) -> Result<RecoveryResult> {
    solve_observed(op, b, cfg, x_init, |_, _| {})
}

/// Like [`solve`], calling `observer` with each trace record and the new iterate.
pub fn solve_observed<O>(
    op: &dyn QuasiLinearOperator,
    b: &DenseVector,
    cfg: &SolverConfig,
    x_init: &DenseVector,
    mut observer: O,
) -> Result<RecoveryResult>
where
    O: FnMut(&IterationRecord, &DenseVector),
{
    check_inputs(op, b, cfg, x_init)?;
    let mut stepper = Stepper::new(op, b, cfg);
    let mut x = x_init.clone();
    let mut lambda_trace = Vec::new();
    let mut lambda = 0.0;
    let mut rel_change = f64::INFINITY;
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;
    let mut degraded = 0;

    for k in 1..=cfg.max_iter {
        let step = stepper.step(&x)?;
        let diff = (&step.next - &x).norm();
        let norm = step.next.norm();
        rel_change = if norm > 0.0 { diff / norm } else { diff };
        lambda = step.lambda;
        lambda_trace.push(LambdaStep {
            lambda: step.lambda,
            regime: step.regime,
        });
        if !step.spectral_converged {
            degraded += 1;
        }
        let record = IterationRecord {
            k,
            lambda: step.lambda,
            regime: step.regime,
            mu: step.mu,
            t_star: step.threshold,
            nnz: count_nonzero(&step.next),
            rel_change,
            residual_norm: step.residual_norm,
        };
        x = step.next;
        iterations = k;
        observer(&record, &x);
        if rel_change <= cfg.tol {
            termination = Termination::Converged;
            break;
        }
    }

    // One probe step from the final iterate gives both the fixed-point
    // residual and the final measurement residual.
    let probe = stepper.clone().step(&x)?;
    let fixed_point_residual = (&x - &probe.next).norm();
    let residual_norm = probe.residual_norm;
    let penalty_value = match cfg.algorithm {
        Algorithm::Ifta => penalty::penalty(cfg.a, &x)?,
        Algorithm::Ista => x.lp_norm(1),
        Algorithm::Ihta => 0.0,
    };
    let objective = residual_norm * residual_norm + lambda * penalty_value;

    Ok(RecoveryResult {
        algorithm: cfg.algorithm,
        solution: x,
        iterations,
        termination,
        final_relative_change: rel_change,
        objective,
        lambda,
        residual_norm,
        fixed_point_residual,
        lambda_trace,
        degraded_spectral_estimates: degraded,
    })
}

pub fn ifta_solve(
    op: &dyn QuasiLinearOperator,
    b: &DenseVector,
    cfg: &SolverConfig,
    x_init: &DenseVector,
) -> Result<RecoveryResult> {
    solve(op, b, &cfg.with_algorithm(Algorithm::Ifta), x_init)
}

pub fn ista_solve(
    op: &dyn QuasiLinearOperator,
    b: &DenseVector,
    cfg: &SolverConfig,
    x_init: &DenseVector,
) -> Result<RecoveryResult> {
    solve(op, b, &cfg.with_algorithm(Algorithm::Ista), x_init)
}

pub fn ihta_solve(
    op: &dyn QuasiLinearOperator,
    b: &DenseVector,
    cfg: &SolverConfig,
    x_init: &DenseVector,
) -> Result<RecoveryResult> {
    solve(op, b, &cfg.with_algorithm(Algorithm::Ihta), x_init)
}

/// `||x - G(B_mu(x))||_2` for a single iteration of `cfg.algorithm` taken from
/// `x` with fresh state (cold power iteration, no weight history). Zero iff
/// `x` reproduces itself under the thresholding step.
pub fn fixed_point_residual(
    op: &dyn QuasiLinearOperator,
    b: &DenseVector,
    x: &DenseVector,
    cfg: &SolverConfig,
) -> Result<f64> {
    check_inputs(op, b, cfg, x)?;
    let step = Stepper::new(op, b, cfg).step(x)?;
    Ok((x - step.next).norm())
}

/// Fresh zero iterate of the operator's ambient dimension.
pub fn zero_start(op: &dyn QuasiLinearOperator) -> DenseVector {
    DenseVector::zeros(op.dims().1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{generate_problem, ExperimentSpec};
    use crate::operator::{LinearOperator, LogShiftOperator};
    use crate::penalty::{subcritical_threshold, supercritical_threshold};
    use crate::{DenseMatrix, DenseVector};

    fn identity_embedded(m: usize, n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    fn spectral_sq(f: &DenseMatrix) -> f64 {
        f.clone().svd(false, false).singular_values.max().powi(2)
    }

    #[test]
    fn identity_embedded_one_sparse_recovery() {
        let a1 = identity_embedded(6, 10);
        let mut x_true = DenseVector::zeros(10);
        x_true[2] = 1.5;
        let b = &a1 * &x_true;
        let log_shift = LogShiftOperator::new(a1.clone(), DenseVector::zeros(10), 0.0).unwrap();
        let linear = LinearOperator::new(a1);
        let ops: [&dyn QuasiLinearOperator; 2] = [&log_shift, &linear];
        for op in ops {
            for alg in Algorithm::ALL {
                let res = solve(op, &b, &SolverConfig::new(alg, 1), &zero_start(op)).unwrap();
                let err = (&res.solution - &x_true).norm() / x_true.norm();
                assert!(err <= 1e-4, "{alg}: {err}");
                assert_eq!(res.termination, Termination::Converged);
            }
        }
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let op = LinearOperator::new(identity_embedded(4, 9));
        let b = DenseVector::zeros(4);
        for alg in Algorithm::ALL {
            let res = solve(&op, &b, &SolverConfig::new(alg, 2), &zero_start(&op)).unwrap();
            assert_eq!(res.solution, DenseVector::zeros(9));
            assert!(res.iterations <= 1);
            assert_eq!(res.termination, Termination::Converged);
            assert_eq!(res.fixed_point_residual, 0.0);
        }
        let cfg = SolverConfig::new(Algorithm::Ifta, 2);
        assert_eq!(
            fixed_point_residual(&op, &b, &DenseVector::zeros(9), &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_iteration_budget_stops_early() {
        let p = generate_problem(4, &ExperimentSpec::default(), 8).unwrap();
        let cfg = SolverConfig {
            max_iter: 1,
            ..SolverConfig::new(Algorithm::Ifta, 8)
        };
        let res = solve(&p.operator, &p.b, &cfg, &zero_start(&p.operator)).unwrap();
        assert_eq!(res.termination, Termination::MaxIter);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.lambda_trace.len(), 1);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let op = LinearOperator::new(identity_embedded(3, 5));
        let b = DenseVector::zeros(3);
        let x0 = DenseVector::zeros(5);
        for cfg in [
            SolverConfig::new(Algorithm::Ifta, 0),
            SolverConfig::new(Algorithm::Ifta, 5),
            SolverConfig {
                epsilon: 1.0,
                ..SolverConfig::new(Algorithm::Ista, 1)
            },
            SolverConfig {
                tol: 0.0,
                ..SolverConfig::new(Algorithm::Ihta, 1)
            },
            SolverConfig {
                a: -1.0,
                ..SolverConfig::new(Algorithm::Ifta, 1)
            },
        ] {
            assert!(solve(&op, &b, &cfg, &x0).is_err(), "{cfg:?}");
        }
        let cfg = SolverConfig::new(Algorithm::Ifta, 1);
        assert!(matches!(
            solve(&op, &DenseVector::zeros(4), &cfg, &x0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(solve(&op, &b, &cfg, &DenseVector::zeros(4)).is_err());
    }

    #[test]
    fn per_iteration_support_and_step_size() {
        let spec = ExperimentSpec::default();
        for (seed, r) in [(1, 3), (2, 6), (3, 10)] {
            let p = generate_problem(seed, &spec, r).unwrap();
            for alg in Algorithm::ALL {
                let cfg = SolverConfig {
                    max_iter: 300,
                    ..SolverConfig::new(alg, r)
                };
                let mut prev = zero_start(&p.operator);
                solve_observed(&p.operator, &p.b, &cfg, &prev.clone(), |rec, x| {
                    let f = p.operator.matrix_unchecked(&prev);
                    let scaled = rec.mu * spectral_sq(&f);
                    assert!(
                        (scaled - (1.0 - cfg.epsilon)).abs() <= 1e-6,
                        "mu contract {scaled}"
                    );
                    assert!(rec.nnz <= r, "{alg} k={} nnz={}", rec.k, rec.nnz);
                    assert_eq!(rec.nnz, x.iter().filter(|v| **v != 0.0).count());
                    if alg == Algorithm::Ifta && rec.lambda > 0.0 {
                        let lm = rec.lambda * rec.mu;
                        assert!(
                            supercritical_threshold(cfg.a, lm)
                                <= subcritical_threshold(cfg.a, lm) + 1e-12
                        );
                        // every surviving entry cleared the threshold before shrinkage
                        let (z, _) = landweber_step_with(&f, &prev, &p.b, rec.mu);
                        for i in 0..x.len() {
                            if z[i].abs() <= rec.t_star {
                                assert_eq!(x[i], 0.0);
                            }
                        }
                    }
                    prev = x.clone();
                })
                .unwrap();
            }
        }
    }

    #[test]
    fn recorded_objective_matches_recomputation() {
        let spec = ExperimentSpec::default();
        let p = generate_problem(12, &spec, 4).unwrap();
        for alg in Algorithm::ALL {
            let cfg = SolverConfig {
                max_iter: 200,
                ..SolverConfig::new(alg, 4)
            };
            let res = solve(&p.operator, &p.b, &cfg, &zero_start(&p.operator)).unwrap();
            let x = &res.solution;
            let residual = (p.operator.apply(x, x).unwrap() - &p.b).norm();
            let reg = match alg {
                Algorithm::Ifta => x
                    .iter()
                    .map(|t| crate::penalty::rho(cfg.a, *t).unwrap())
                    .sum::<f64>(),
                Algorithm::Ista => x.iter().map(|t| t.abs()).sum(),
                Algorithm::Ihta => 0.0,
            };
            let expected = residual * residual + res.lambda * reg;
            assert!(
                (res.objective - expected).abs() <= 1e-10 * (1.0 + expected),
                "{alg}"
            );
            assert!((res.residual_norm - residual).abs() <= 1e-10 * (1.0 + residual));
            assert_eq!(res.lambda, res.lambda_trace.last().unwrap().lambda);
        }
    }

    #[test]
    fn converged_ifta_is_a_fixed_point() {
        let spec = ExperimentSpec::default();
        let mut checked = 0;
        for seed in 0..6 {
            let p = generate_problem(seed, &spec, 3).unwrap();
            let cfg = SolverConfig::new(Algorithm::Ifta, 3);
            let res = ifta_solve(&p.operator, &p.b, &cfg, &zero_start(&p.operator)).unwrap();
            if res.termination != Termination::Converged {
                continue;
            }
            checked += 1;
            assert!(res.final_relative_change <= cfg.tol);
            let bound = 10.0 * cfg.tol * res.solution.norm();
            let fresh = fixed_point_residual(&p.operator, &p.b, &res.solution, &cfg).unwrap();
            assert!(fresh <= bound, "seed {seed}: {fresh} > {bound}");
            assert!(res.fixed_point_residual <= bound);
        }
        assert!(checked >= 5);
    }

    #[test]
    fn generic_point_is_not_a_fixed_point() {
        let p = generate_problem(8, &ExperimentSpec::default(), 3).unwrap();
        let x = DenseVector::from_fn(100, |i, _| ((i * 37 % 11) as f64 - 5.0) / 7.0);
        for alg in Algorithm::ALL {
            let cfg = SolverConfig::new(alg, 3);
            assert!(fixed_point_residual(&p.operator, &p.b, &x, &cfg).unwrap() > 0.0);
        }
    }

    #[test]
    fn hard_thresholding_keeps_at_most_r() {
        let p = generate_problem(21, &ExperimentSpec::default(), 9).unwrap();
        let res = ihta_solve(
            &p.operator,
            &p.b,
            &SolverConfig::new(Algorithm::Ista, 4),
            &zero_start(&p.operator),
        )
        .unwrap();
        assert_eq!(res.algorithm, Algorithm::Ihta);
        assert!(res.nnz() <= 4);
        assert!(res
            .lambda_trace
            .iter()
            .all(|s| s.regime.is_none() && s.lambda == 0.0));
    }

    #[test]
    fn soft_thresholding_weight_is_recorded() {
        let p = generate_problem(5, &ExperimentSpec::default(), 5).unwrap();
        let cfg = SolverConfig {
            max_iter: 50,
            ..SolverConfig::new(Algorithm::Ista, 5)
        };
        let mut seen = Vec::new();
        let res = ista_solve(&p.operator, &p.b, &cfg, &zero_start(&p.operator)).unwrap();
        solve_observed(
            &p.operator,
            &p.b,
            &cfg,
            &zero_start(&p.operator),
            |rec, _| {
                assert!(
                    (rec.lambda - 2.0 * rec.t_star / rec.mu).abs() <= 1e-12 * rec.lambda.max(1.0)
                );
                seen.push(rec.lambda);
            },
        )
        .unwrap();
        let trace: Vec<f64> = res.lambda_trace.iter().map(|s| s.lambda).collect();
        assert_eq!(trace, seen);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = generate_problem(33, &ExperimentSpec::default(), 5).unwrap();
        for alg in Algorithm::ALL {
            let cfg = SolverConfig::new(alg, 5);
            let a = solve(&p.operator, &p.b, &cfg, &zero_start(&p.operator)).unwrap();
            let b = solve(&p.operator, &p.b, &cfg, &zero_start(&p.operator)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn linear_limit_matches_wrapped_matrix() {
        let spec = ExperimentSpec {
            eta: 0.0,
            ..ExperimentSpec::default()
        };
        let p = generate_problem(17, &spec, 4).unwrap();
        let linear = LinearOperator::new(p.operator.a1().clone());
        let cfg = SolverConfig::new(Algorithm::Ifta, 4);
        let mut shifted = Vec::new();
        let res_shift = solve_observed(&p.operator, &p.b, &cfg, &zero_start(&linear), |_, x| {
            shifted.push(x.clone())
        })
        .unwrap();
        let mut plain = Vec::new();
        let res_plain = solve_observed(&linear, &p.b, &cfg, &zero_start(&linear), |_, x| {
            plain.push(x.clone())
        })
        .unwrap();
        assert_eq!(shifted.len(), plain.len());
        for (u, v) in shifted.iter().zip(&plain) {
            assert!((u - v).amax() <= 1e-12);
        }
        assert_eq!(res_shift.iterations, res_plain.iterations);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.to_string().parse::<Algorithm>().unwrap(), alg);
            let json = serde_json::to_string(&alg).unwrap();
            assert_eq!(json, format!("\"{}\"", alg.name()));
        }
        assert!("IFTA".parse::<Algorithm>().is_ok());
        assert!("lasso".parse::<Algorithm>().is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let p = generate_problem(2, &ExperimentSpec::default(), 2).unwrap();
        let res = solve(
            &p.operator,
            &p.b,
            &SolverConfig::new(Algorithm::Ifta, 2),
            &zero_start(&p.operator),
        )
        .unwrap();
        let text = serde_json::to_string(&res).unwrap();
        let back: RecoveryResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, res);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
