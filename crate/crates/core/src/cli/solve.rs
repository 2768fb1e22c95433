use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};

use super::{emit, resolve_seed, FileConfig, Format, ModelFlags, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::experiment::{generate_problem, relative_error, ExperimentSpec};
use crate::operator::{LogShiftOperator, QuasiLinearOperator};
use crate::solver::{self, Algorithm, RecoveryResult, SolverConfig, Termination};
use crate::DenseVector;

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    /// Sparsity prior (and planted sparsity when generating).
    #[arg(long)]
    pub r: Option<usize>,
    /// Operator document to load instead of generating one.
    #[arg(long, value_name = "FILE", requires = "measurements")]
    pub operator: Option<PathBuf>,
    /// `{"b": [...], "x_true": [...]}`; `x_true` is optional.
    #[arg(long, value_name = "FILE")]
    pub measurements: Option<PathBuf>,
    /// Per-iteration trace as JSON lines.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Write the generated operator and measurements into this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_problem: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelFlags,
}

/// Measurement vector, plus the planted signal when known.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementDocument {
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_true: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct SolveReport {
    #[serde(flatten)]
    result: RecoveryResult,
    nnz: usize,
    /// Present when the planted signal is known.
    relative_error: Option<f64>,
    /// Seed of the generated instance; absent for loaded problems.
    seed: Option<u64>,
}

struct Instance {
    operator: LogShiftOperator,
    b: DenseVector,
    x_true: Option<DenseVector>,
    seed: Option<u64>,
}

pub fn run(args: SolveArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let model = &args.model;
    let format = model.format.or(file.format).unwrap_or(Format::Json);
    if format != Format::Json {
        bail!("solve writes a JSON result; use --trace for JSON lines");
    }
    let algorithm = match (args.algorithm, &file.algorithm) {
        (Some(alg), _) => alg,
        (None, Some(text)) => text.as_text().parse()?,
        (None, None) => Algorithm::Ifta,
    };
    let defaults = ExperimentSpec::default();
    let operator_path = args.operator.clone().or_else(|| file.operator.clone());
    let measurements_path = args
        .measurements
        .clone()
        .or_else(|| file.measurements.clone());

    let instance = match operator_path {
        Some(op_path) => {
            let Some(meas_path) = measurements_path else {
                bail!("--operator needs --measurements");
            };
            load_instance(&op_path, &meas_path)?
        }
        None => {
            let spec = ExperimentSpec {
                m: model.m.or(file.m).unwrap_or(defaults.m),
                n: model.n.or(file.n).unwrap_or(defaults.n),
                eta: model.eta.or(file.eta).unwrap_or(defaults.eta),
                reference: model
                    .reference
                    .or(file.reference)
                    .map_or(defaults.reference, Into::into),
                ..defaults.clone()
            };
            let r = args.r.or(file.r).unwrap_or(3);
            let seed = resolve_seed(model.seed, file.seed)?;
            let problem = generate_problem(seed, &spec, r)?;
            Instance {
                operator: problem.operator,
                b: problem.b,
                x_true: Some(problem.x_true),
                seed: Some(seed),
            }
        }
    };

    let (m, n) = instance.operator.dims();
    if m >= n {
        eprintln!("warning: operator is {m}x{n}, not underdetermined");
    }
    if let Some(dir) = &args.dump_problem {
        dump_problem(dir, &instance)?;
    }

    let r = match args.r.or(file.r) {
        Some(r) => r,
        None => match &instance.x_true {
            Some(x) => x.iter().filter(|v| **v != 0.0).count().max(1),
            None => bail!("--r is required when the planted signal is unknown"),
        },
    };
    let a = match (model.a, &file.a) {
        (Some(a), _) => a,
        (None, Some(list)) => list.single()?,
        (None, None) => solver::DEFAULT_A,
    };
    let cfg = SolverConfig {
        algorithm,
        a,
        sparsity: r,
        epsilon: model
            .epsilon
            .or(file.epsilon)
            .unwrap_or(solver::DEFAULT_EPSILON),
        tol: model.tol.or(file.tol).unwrap_or(solver::DEFAULT_TOL),
        max_iter: model
            .max_iter
            .or(file.max_iter)
            .unwrap_or(solver::DEFAULT_MAX_ITER),
        ..SolverConfig::default()
    };

    let x0 = solver::zero_start(&instance.operator);
    let trace_path = args.trace.clone().or_else(|| file.trace.clone());
    let result = match trace_path {
        Some(path) => {
            let mut sink = BufWriter::new(
                File::create(&path)
                    .with_context(|| format!("creating trace {}", path.display()))?,
            );
            let mut write_err = None;
            let result =
                solver::solve_observed(&instance.operator, &instance.b, &cfg, &x0, |rec, _| {
                    if write_err.is_none() {
                        let line = serde_json::to_string(rec).expect("trace records serialise");
                        if let Err(e) = writeln!(sink, "{line}") {
                            write_err = Some(e);
                        }
                    }
                })?;
            if let Some(e) = write_err {
                return Err(e).context("writing trace");
            }
            sink.flush()?;
            result
        }
        None => solver::solve(&instance.operator, &instance.b, &cfg, &x0)?,
    };

    let termination = result.termination;
    let report = SolveReport {
        relative_error: instance
            .x_true
            .as_ref()
            .map(|x| relative_error(&result.solution, x)),
        nnz: result.nnz(),
        seed: instance.seed,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    let out = model.out.clone().or_else(|| file.out.clone());
    emit(out.as_deref(), &text)?;
    Ok(match termination {
        Termination::Converged => EXIT_OK,
        Termination::MaxIter => EXIT_NOT_CONVERGED,
    })
}

fn load_instance(
    op_path: &std::path::Path,
    meas_path: &std::path::Path,
) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(op_path)
        .with_context(|| format!("reading operator {}", op_path.display()))?;
    let operator = LogShiftOperator::from_json(&text)
        .with_context(|| format!("parsing operator {}", op_path.display()))?;
    let text = fs::read_to_string(meas_path)
        .with_context(|| format!("reading measurements {}", meas_path.display()))?;
    let doc: MeasurementDocument = serde_json::from_str(&text)
        .with_context(|| format!("parsing measurements {}", meas_path.display()))?;
    let (m, n) = operator.dims();
    if doc.b.len() != m {
        bail!(
            "measurement vector has length {}, operator has {m} rows",
            doc.b.len()
        );
    }
    if let Some(x) = &doc.x_true {
        if x.len() != n {
            bail!("x_true has length {}, operator has {n} columns", x.len());
        }
    }
    Ok(Instance {
        operator,
        b: DenseVector::from_vec(doc.b),
        x_true: doc.x_true.map(DenseVector::from_vec),
        seed: None,
    })
}

fn dump_problem(dir: &std::path::Path, instance: &Instance) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let doc = MeasurementDocument {
        b: instance.b.iter().copied().collect(),
        x_true: instance
            .x_true
            .as_ref()
            .map(|x| x.iter().copied().collect()),
    };
    fs::write(dir.join("operator.json"), instance.operator.to_json()?)?;
    fs::write(
        dir.join("measurements.json"),
        serde_json::to_string_pretty(&doc)?,
    )?;
    Ok(())
}
