use std::path::PathBuf;

use clap::Args;

use super::{
    emit, parse_algorithms, parse_levels, resolve_seed, FileConfig, Format, ModelFlags, EXIT_OK,
};
use crate::experiment::{run_sweep, ExperimentSpec};

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated list, e.g. `ifta,ista`.
    #[arg(long, alias = "algorithms", value_name = "LIST")]
    pub algorithm: Option<String>,
    /// Sparsity levels, e.g. `1..15` or `1,2,5`.
    #[arg(long, value_name = "LEVELS")]
    pub levels: Option<String>,
    /// Trials per sparsity level.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Relative error counted as exact recovery.
    #[arg(long)]
    pub success_threshold: Option<f64>,
    #[command(flatten)]
    pub model: ModelFlags,
}

pub(crate) fn build_spec(args: &SweepArgs, file: &FileConfig) -> anyhow::Result<ExperimentSpec> {
    let d = ExperimentSpec::default();
    let model = &args.model;
    let algorithms = match (&args.algorithm, &file.algorithm) {
        (Some(text), _) => parse_algorithms(text)?,
        (None, Some(list)) => parse_algorithms(&list.as_text())?,
        (None, None) => d.algorithms.clone(),
    };
    let sparsity_levels = match (&args.levels, &file.levels) {
        (Some(text), _) => parse_levels(text)?,
        (None, Some(list)) => parse_levels(&list.as_text())?,
        (None, None) => d.sparsity_levels.clone(),
    };
    let a = match (model.a, &file.a) {
        (Some(a), _) => a,
        (None, Some(list)) => list.single()?,
        (None, None) => d.a,
    };
    let spec = ExperimentSpec {
        m: model.m.or(file.m).unwrap_or(d.m),
        n: model.n.or(file.n).unwrap_or(d.n),
        sparsity_levels,
        trials_per_level: args.trials.or(file.trials).unwrap_or(d.trials_per_level),
        eta: model.eta.or(file.eta).unwrap_or(d.eta),
        a,
        epsilon: model.epsilon.or(file.epsilon).unwrap_or(d.epsilon),
        success_threshold: args.success_threshold.unwrap_or(d.success_threshold),
        tol: model.tol.or(file.tol).unwrap_or(d.tol),
        max_iter: model.max_iter.or(file.max_iter).unwrap_or(d.max_iter),
        master_seed: resolve_seed(model.seed, file.seed)?,
        algorithms,
        reference: model
            .reference
            .or(file.reference)
            .map_or(d.reference, Into::into),
    };
    spec.validate()?;
    Ok(spec)
}

/// CSV goes to `--out` (stdout if absent) with the full JSON report beside it
/// as `<out>.json`; `--format json` writes only the JSON report.
pub fn run(args: SweepArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let spec = build_spec(&args, file)?;
    let format = args.model.format.or(file.format).unwrap_or(Format::Csv);
    if format == Format::Jsonl {
        anyhow::bail!("sweep writes csv or json");
    }
    let out: Option<PathBuf> = args.model.out.clone().or_else(|| file.out.clone());
    let report = run_sweep(&spec)?;
    eprint!("{}", report.summary_table());
    match format {
        Format::Csv => {
            emit(out.as_deref(), &report.to_csv())?;
            if let Some(path) = &out {
                let mut sidecar = path.clone().into_os_string();
                sidecar.push(".json");
                emit(Some(PathBuf::from(sidecar).as_path()), &report.to_json()?)?;
            }
        }
        Format::Json | Format::Jsonl => emit(out.as_deref(), &report.to_json()?)?,
    }
    Ok(EXIT_OK)
}
