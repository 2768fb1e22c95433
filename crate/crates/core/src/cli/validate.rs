//! Self-check suite behind `quasisparse validate`.
//!
//! The prox is compared against a `1e-4` grid search on log-uniform samples of
//! `(a, lambda)` and uniform `gamma`, then checked for its structural
//! properties. Operator checks cover the adjoint identity, the Lipschitz
//! bound and power iteration against a full SVD. [`run_with`] takes the prox
//! under test as a parameter so faults can be injected.

use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{emit, resolve_seed, FileConfig, EXIT_OK, EXIT_USAGE};
use crate::experiment::{generate_problem, ExperimentSpec, ReferencePoint};
use crate::operator::QuasiLinearOperator;
use crate::oracle::prox_grid;
use crate::penalty::{
    prox_scalar, scalar_objective, subcritical_threshold, supercritical_threshold, threshold_value,
    PenaltyParams,
};
use crate::spectral::PowerIteration;
use crate::DenseVector;

pub const DEFAULT_SAMPLES: usize = 1200;
pub const GRID_STEP: f64 = 1e-4;
pub const OBJECTIVE_TOL: f64 = 1e-6;
pub const ARGMIN_TOL: f64 = 1e-3;
/// Distance from `t*` inside which the argmin comparison is skipped.
pub const DISCONTINUITY_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Number of sampled `(a, lambda, gamma)` triples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the JSON report (stdout if absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub a: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub prox: f64,
    pub t_star: f64,
    pub grid_argmin: f64,
    /// `objective(prox) - objective(grid_argmin)`.
    pub objective_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    /// Up to 50 failing cases, one line each.
    pub failing_cases: Vec<String>,
    pub samples: Vec<Sample>,
}

impl ValidationReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_USAGE
        }
    }
}

const MAX_DUMPED_FAILURES: usize = 50;

struct Tally {
    checks: Vec<CheckOutcome>,
    failing_cases: Vec<String>,
}

impl Tally {
    fn record(&mut self, name: &'static str, cases: usize, failures: Vec<String>) {
        self.checks.push(CheckOutcome {
            name,
            passed: failures.is_empty(),
            cases,
            failures: failures.len(),
        });
        let room = MAX_DUMPED_FAILURES.saturating_sub(self.failing_cases.len());
        self.failing_cases.extend(
            failures
                .into_iter()
                .take(room)
                .map(|f| format!("{name}: {f}")),
        );
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Draw `count` triples with `a, lambda` log-uniform on `[0.1, 10]` and
/// `gamma` uniform on `[-5, 5]`.
pub fn sample_triples(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = log_uniform(&mut rng, 0.1, 10.0);
            let lambda = log_uniform(&mut rng, 0.1, 10.0);
            let gamma = rng.random_range(-5.0..=5.0);
            (a, lambda, gamma)
        })
        .collect()
}

/// Run every check with `prox` as the proximal map under test.
pub fn run_with<P>(seed: u64, samples: usize, prox: P) -> ValidationReport
where
    P: Fn(PenaltyParams, f64) -> f64 + Sync,
{
    let mut tally = Tally {
        checks: Vec::new(),
        failing_cases: Vec::new(),
    };

    let triples = sample_triples(seed, samples);
    let samples: Vec<Sample> = triples
        .par_iter()
        .map(|&(a, lambda, gamma)| {
            let p = PenaltyParams::new(a, lambda).expect("sampled parameters are positive");
            let value = prox(p, gamma);
            let grid = prox_grid(p, gamma, GRID_STEP);
            Sample {
                a,
                lambda,
                gamma,
                prox: value,
                t_star: threshold_value(p).threshold,
                grid_argmin: grid.argmin,
                objective_gap: scalar_objective(p, value, gamma) - grid.value,
            }
        })
        .collect();

    let describe = |s: &Sample| {
        format!(
            "a={} lambda={} gamma={} prox={} grid_argmin={} t*={} gap={:e}",
            s.a, s.lambda, s.gamma, s.prox, s.grid_argmin, s.t_star, s.objective_gap
        )
    };
    let params = |s: &Sample| PenaltyParams::new(s.a, s.lambda).expect("valid");

    let failures = samples
        .iter()
        .filter(|s| !(s.objective_gap <= OBJECTIVE_TOL))
        .map(describe)
        .collect();
    tally.record("prox_objective_vs_grid", samples.len(), failures);

    let away: Vec<&Sample> = samples
        .iter()
        .filter(|s| (s.gamma.abs() - s.t_star).abs() > DISCONTINUITY_MARGIN)
        .collect();
    let failures = away
        .iter()
        .filter(|s| !((s.prox - s.grid_argmin).abs() <= ARGMIN_TOL))
        .map(|s| describe(s))
        .collect();
    tally.record("prox_argmin_vs_grid", away.len(), failures);

    let failures = samples
        .iter()
        .filter(|s| {
            let mirrored = prox(params(s), -s.gamma);
            !((mirrored + s.prox).abs() <= 1e-14 * (1.0 + s.gamma.abs()))
        })
        .map(describe)
        .collect();
    tally.record("odd_symmetry", samples.len(), failures);

    let failures = samples
        .iter()
        .filter(|s| {
            let same_side = s.prox == 0.0 || s.prox.signum() == s.gamma.signum();
            !(same_side && s.prox.abs() <= s.gamma.abs())
        })
        .map(describe)
        .collect();
    tally.record("shrinkage", samples.len(), failures);

    let failures = samples
        .iter()
        .filter(|s| {
            let at_threshold = prox(params(s), s.t_star);
            let inside = s.gamma.abs() <= s.t_star;
            let clearly_outside = s.gamma.abs() > s.t_star * (1.0 + 1e-6) + 1e-9;
            at_threshold != 0.0 || (inside && s.prox != 0.0) || (clearly_outside && s.prox == 0.0)
        })
        .map(describe)
        .collect();
    tally.record("zero_iff_below_threshold", samples.len(), failures);

    let mut failures = Vec::new();
    let mut shapes: Vec<f64> = vec![0.5, 1.0, 2.0, 5.0];
    shapes.extend(samples.iter().map(|s| s.a));
    for &a in &shapes {
        let lambda = 1.0 / (a * a);
        let gap = (subcritical_threshold(a, lambda) - supercritical_threshold(a, lambda)).abs();
        if !(gap <= 1e-12) {
            failures.push(format!("a={a}: |t1 - t2| = {gap:e}"));
        }
    }
    tally.record("threshold_continuity", shapes.len(), failures);

    operator_checks(seed, &mut tally);

    ValidationReport {
        passed: tally.checks.iter().all(|c| c.passed),
        seed,
        checks: tally.checks,
        failing_cases: tally.failing_cases,
        samples,
    }
}

/// Adjoint identity, Lipschitz bound and power iteration versus SVD on a few
/// generated log-shift operators with an active nonlinearity.
fn operator_checks(seed: u64, tally: &mut Tally) {
    let spec = ExperimentSpec {
        m: 20,
        n: 50,
        eta: 0.5,
        reference: ReferencePoint::Independent,
        ..ExperimentSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    let mut uniform = |len: usize| DenseVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0));
    let power = PowerIteration::default();
    let instances = 10;
    let (mut adjoint, mut lipschitz, mut spectral) = (Vec::new(), Vec::new(), Vec::new());

    for i in 0..instances {
        let problem = match generate_problem(seed.wrapping_add(i), &spec, 5) {
            Ok(p) => p,
            Err(e) => {
                adjoint.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let op = &problem.operator;
        let (y, y2, x, w) = (
            uniform(spec.n),
            uniform(spec.n),
            uniform(spec.n),
            uniform(spec.m),
        );

        let lhs = op.apply(&y, &x).expect("dims").dot(&w);
        let rhs = x.dot(&op.adjoint_apply(&y, &w).expect("dims"));
        if !((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs())) {
            adjoint.push(format!(
                "instance {i}: <F(y)x, w> = {lhs}, <x, F(y)^T w> = {rhs}"
            ));
        }

        let f1 = op.matrix_unchecked(&y);
        let f2 = op.matrix_unchecked(&y2);
        let lhs = (&f1 - &f2).norm();
        let bound = op.lipschitz_constant() * (&y - &y2).norm();
        if !(lhs <= bound * (1.0 + 1e-12)) {
            lipschitz.push(format!("instance {i}: ||F(x) - F(y)||_F = {lhs} > {bound}"));
        }

        let exact = f1.clone().svd(false, false).singular_values.max().powi(2);
        match power.estimate(&f1) {
            Ok(est) if (est.value - exact).abs() <= 1e-6 * exact => {}
            Ok(est) => spectral.push(format!("instance {i}: power {} vs svd {exact}", est.value)),
            Err(e) => spectral.push(format!("instance {i}: {e}")),
        }
    }
    let n = instances as usize;
    tally.record("adjoint_identity", n, adjoint);
    tally.record("lipschitz_bound", n, lipschitz);
    tally.record("spectral_norm_vs_svd", n, spectral);
}

pub fn run_cli(args: ValidateArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let seed = resolve_seed(args.seed, file.seed)?;
    let samples = args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
    let report = run_with(seed, samples, prox_scalar);
    for c in &report.checks {
        eprintln!(
            "{} {:<26} {} cases, {} failures",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.cases,
            c.failures
        );
    }
    for line in &report.failing_cases {
        eprintln!("  {line}");
    }
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    let out = args.out.clone().or_else(|| file.out.clone());
    emit(out.as_deref(), &text)?;
    Ok(report.exit_code())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correct_prox_passes() {
        let report = run_with(7, 200, prox_scalar);
        assert!(report.passed, "{:#?}", report.failing_cases);
        assert_eq!(report.samples.len(), 200);
    }

    #[test]
    fn sign_flip_is_caught() {
        let report = run_with(7, 200, |p, g| -prox_scalar(p, g));
        assert!(!report.passed);
        assert!(!report.failing_cases.is_empty());
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert!(failed.contains(&"prox_objective_vs_grid"));
        assert!(failed.contains(&"shrinkage"));
    }

    #[test]
    fn samples_are_seeded() {
        assert_eq!(sample_triples(3, 10), sample_triples(3, 10));
        assert_ne!(sample_triples(3, 10), sample_triples(4, 10));
        for (a, lambda, gamma) in sample_triples(1, 500) {
            assert!((0.1..=10.0).contains(&a) && (0.1..=10.0).contains(&lambda));
            assert!((-5.0..=5.0).contains(&gamma));
        }
    }
}
