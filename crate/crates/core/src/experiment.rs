//! Seeded phase-transition experiments.
//!
//! Each trial draws a Gaussian `A1`, an `r`-sparse ground truth with `N(0, 1)`
//! values on a uniformly random support, builds the log-shift operator around
//! it and measures `b = F(x_true) x_true`. Every algorithm in a sweep sees the
//! same problem for a given `(r, trial)` pair, so success curves are paired.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{LogShiftOperator, QuasiLinearOperator, DEFAULT_ETA};
use crate::solver::{self, Algorithm, SolverConfig, Termination};
use crate::{format_number, DenseMatrix, DenseVector};

pub const DEFAULT_M: usize = 30;
pub const DEFAULT_N: usize = 100;
pub const DEFAULT_TRIALS: usize = 30;
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_MASTER_SEED: u64 = 42;

/// Where the log-shift nonlinearity is centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePoint {
    /// `x0 = x_true`: the nonlinearity vanishes at the planted signal.
    TrueSignal,
    /// `x0` is an independent draw with the same sparse law as `x_true`.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub m: usize,
    pub n: usize,
    pub sparsity_levels: Vec<usize>,
    pub trials_per_level: usize,
    pub eta: f64,
    pub a: f64,
    pub epsilon: f64,
    /// Relative error at or below which a trial counts as exact recovery.
    pub success_threshold: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub reference: ReferencePoint,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            m: DEFAULT_M,
            n: DEFAULT_N,
            sparsity_levels: (1..=15).collect(),
            trials_per_level: DEFAULT_TRIALS,
            eta: DEFAULT_ETA,
            a: solver::DEFAULT_A,
            epsilon: solver::DEFAULT_EPSILON,
            success_threshold: DEFAULT_SUCCESS_THRESHOLD,
            tol: solver::DEFAULT_TOL,
            max_iter: solver::DEFAULT_MAX_ITER,
            master_seed: DEFAULT_MASTER_SEED,
            algorithms: Algorithm::ALL.to_vec(),
            reference: ReferencePoint::TrueSignal,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Malformed("m and n must be positive".into()));
        }
        if self.trials_per_level == 0 {
            return Err(Error::Malformed(
                "trials_per_level must be at least 1".into(),
            ));
        }
        if self.sparsity_levels.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Malformed(
                "need at least one sparsity level and one algorithm".into(),
            ));
        }
        if let Some(&r) = self
            .sparsity_levels
            .iter()
            .find(|&&r| r >= self.m || r >= self.n)
        {
            return Err(Error::SparsityOutOfRange {
                r,
                lower: 0,
                n: self.m.min(self.n),
            });
        }
        if !(self.success_threshold >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "success_threshold",
                value: self.success_threshold,
                expected: ">= 0",
            });
        }
        // eta is checked by the operator, the rest by the solver config
        LogShiftOperator::new(DenseMatrix::zeros(1, 1), DenseVector::zeros(1), self.eta)?;
        self.solver_config(Algorithm::Ifta, 1)
            .validate(self.n.max(2))
    }

    /// Solver settings for sparsity level `r`. The prior is clamped to at least
    /// 1; with `r = 0` the measurements vanish and every solver stays at zero.
    pub fn solver_config(&self, algorithm: Algorithm, r: usize) -> SolverConfig {
        SolverConfig {
            algorithm,
            a: self.a,
            sparsity: r.max(1),
            epsilon: self.epsilon,
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub operator: LogShiftOperator,
    pub x_true: DenseVector,
    pub b: DenseVector,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at sparsity `r`. Independent of the algorithm.
pub fn trial_seed(master_seed: u64, r: usize, trial: usize) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ r as u64);
    splitmix64(h ^ trial as u64)
}

fn sparse_gaussian(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DenseVector {
    let mut support = index::sample(rng, n, r).into_vec();
    support.sort_unstable();
    let mut x = DenseVector::zeros(n);
    for i in support {
        x[i] = rng.sample(StandardNormal);
    }
    x
}

/// Draw one problem instance. `A1` is filled row by row from the seeded stream.
pub fn generate_problem(seed: u64, spec: &ExperimentSpec, r: usize) -> Result<Problem> {
    let (m, n) = (spec.m, spec.n);
    if r >= n {
        return Err(Error::SparsityOutOfRange { r, lower: 0, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let a1 = DenseMatrix::from_row_slice(m, n, &entries);
    let x_true = sparse_gaussian(&mut rng, n, r);
    let reference = match spec.reference {
        ReferencePoint::TrueSignal => x_true.clone(),
        ReferencePoint::Independent => sparse_gaussian(&mut rng, n, r),
    };
    let operator = LogShiftOperator::new(a1, reference, spec.eta)?;
    let b = operator.apply(&x_true, &x_true)?;
    Ok(Problem {
        operator,
        x_true,
        b,
    })
}

/// `||x_hat - x_true|| / ||x_true||`, or `||x_hat||` when `x_true = 0`.
pub fn relative_error(x_hat: &DenseVector, x_true: &DenseVector) -> f64 {
    let denom = x_true.norm();
    let diff = (x_hat - x_true).norm();
    if denom > 0.0 {
        diff / denom
    } else {
        x_hat.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    /// `None` when the trial failed before producing an estimate.
    pub relative_error: Option<f64>,
    pub success: bool,
    pub iterations: usize,
    pub termination: Option<Termination>,
    pub fixed_point_residual: Option<f64>,
    pub solution_norm: Option<f64>,
    pub error: Option<String>,
}

impl TrialRecord {
    fn failed(seed: u64, err: Error) -> Self {
        Self {
            seed,
            relative_error: None,
            success: false,
            iterations: 0,
            termination: None,
            fixed_point_residual: None,
            solution_norm: None,
            error: Some(err.to_string()),
        }
    }
}

/// Generate the problem for `seed` and solve it with `algorithm` from zero.
/// Failures are recorded, not propagated.
pub fn run_trial(seed: u64, spec: &ExperimentSpec, r: usize, algorithm: Algorithm) -> TrialRecord {
    let outcome = generate_problem(seed, spec, r).and_then(|problem| {
        let cfg = spec.solver_config(algorithm, r);
        let x0 = solver::zero_start(&problem.operator);
        let result = solver::solve(&problem.operator, &problem.b, &cfg, &x0)?;
        Ok((problem, result))
    });
    match outcome {
        Ok((problem, result)) => {
            let err = relative_error(&result.solution, &problem.x_true);
            TrialRecord {
                seed,
                relative_error: Some(err),
                success: err <= spec.success_threshold,
                iterations: result.iterations,
                termination: Some(result.termination),
                fixed_point_residual: Some(result.fixed_point_residual),
                solution_norm: Some(result.solution.norm()),
                error: None,
            }
        }
        Err(e) => TrialRecord::failed(seed, e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub algorithm: Algorithm,
    pub r: usize,
    pub success_rate: f64,
    /// Mean over trials that produced an estimate.
    pub mean_relative_error: f64,
    pub mean_iterations: f64,
    /// Ordered by trial index.
    pub trials: Vec<TrialRecord>,
}

impl LevelSummary {
    fn aggregate(algorithm: Algorithm, r: usize, trials: Vec<TrialRecord>) -> Self {
        let count = trials.len() as f64;
        let successes = trials.iter().filter(|t| t.success).count() as f64;
        let errors: Vec<f64> = trials.iter().filter_map(|t| t.relative_error).collect();
        let mean_relative_error = if errors.is_empty() {
            f64::NAN
        } else {
            errors.iter().sum::<f64>() / errors.len() as f64
        };
        let mean_iterations = trials.iter().map(|t| t.iterations as f64).sum::<f64>() / count;
        Self {
            algorithm,
            r,
            success_rate: successes / count,
            mean_relative_error,
            mean_iterations,
            trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: ExperimentSpec,
    /// One entry per `(algorithm, r)`, algorithms in spec order, then `r`.
    pub levels: Vec<LevelSummary>,
}

pub const CSV_HEADER: &str = "algorithm,r,success_rate,mean_relative_error,mean_iterations";

impl SweepReport {
    pub fn level(&self, algorithm: Algorithm, r: usize) -> Option<&LevelSummary> {
        self.levels
            .iter()
            .find(|l| l.algorithm == algorithm && l.r == r)
    }

    pub fn levels_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &LevelSummary> {
        self.levels.iter().filter(move |l| l.algorithm == algorithm)
    }

    /// Success rate averaged over all sparsity levels.
    pub fn mean_success_rate(&self, algorithm: Algorithm) -> f64 {
        let rates: Vec<f64> = self.levels_for(algorithm).map(|l| l.success_rate).collect();
        rates.iter().sum::<f64>() / rates.len() as f64
    }

    /// One row per `(algorithm, r)`; floats via [`format_number`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                l.algorithm,
                l.r,
                format_number(l.success_rate),
                format_number(l.mean_relative_error),
                format_number(l.mean_iterations)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fixed-width table of success rate and mean relative error per level.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>4}", "r");
        for alg in &self.spec.algorithms {
            let _ = write!(out, " | {:>6} {:>10}", alg.name().to_uppercase(), "rel.err");
        }
        out.push('\n');
        for &r in &self.spec.sparsity_levels {
            let _ = write!(out, "{r:>4}");
            for &alg in &self.spec.algorithms {
                match self.level(alg, r) {
                    Some(l) => {
                        let _ = write!(
                            out,
                            " | {:>6.3} {:>10.3e}",
                            l.success_rate, l.mean_relative_error
                        );
                    }
                    None => {
                        let _ = write!(out, " | {:>6} {:>10}", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Run every `(algorithm, r, trial)` combination in parallel and aggregate in
/// deterministic order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepReport> {
    spec.validate()?;
    let jobs: Vec<(Algorithm, usize, usize)> = spec
        .algorithms
        .iter()
        .flat_map(|&alg| {
            spec.sparsity_levels
                .iter()
                .flat_map(move |&r| (0..spec.trials_per_level).map(move |t| (alg, r, t)))
        })
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(alg, r, t)| run_trial(trial_seed(spec.master_seed, r, t), spec, r, alg))
        .collect();

    let mut levels = Vec::with_capacity(spec.algorithms.len() * spec.sparsity_levels.len());
    let mut chunks = records.chunks(spec.trials_per_level);
    for &alg in &spec.algorithms {
        for &r in &spec.sparsity_levels {
            let chunk = chunks.next().expect("one chunk per (algorithm, level)");
            levels.push(LevelSummary::aggregate(alg, r, chunk.to_vec()));
        }
    }
    Ok(SweepReport {
        spec: spec.clone(),
        levels,
    })
}
