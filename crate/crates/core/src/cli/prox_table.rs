use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::bail;
use clap::Args;

use super::{emit, FileConfig, Format, EXIT_OK, EXIT_USAGE};
use crate::format_number;
use crate::oracle::prox_refined;
use crate::penalty::{prox_scalar, scalar_objective, PenaltyParams, Regime};

pub const PROX_CSV_HEADER: &str = "a,lambda,gamma,prox,t_star,regime";

/// Largest accepted distance between a tabulated prox value and the oracle.
pub const VALIDATE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Args)]
pub struct ProxTableArgs {
    /// Comma-separated shape parameters.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub a: Vec<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Cross-check every row against the brute-force oracle.
    #[arg(long)]
    pub validate: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxRow {
    pub a: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub prox: f64,
    pub t_star: f64,
    pub regime: Regime,
}

pub fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::SubCritical => "subcritical",
        Regime::SuperCritical => "supercritical",
    }
}

/// `lo + i * step` for `i = 0..` while the point stays within `hi`. When
/// `1/step` is an integer the points are computed as `k / (1/step)` so that
/// decimal grids print cleanly.
pub fn gamma_grid(lo: f64, hi: f64, step: f64) -> anyhow::Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && lo.is_finite() && hi.is_finite()) {
        bail!("gamma range needs finite bounds and a positive step");
    }
    if hi < lo {
        bail!("empty gamma range [{lo}, {hi}]");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let inv = (1.0 / step).round();
    let k0 = (lo * inv).round();
    let decimal = (1.0 / step - inv).abs() < 1e-9 && (lo * inv - k0).abs() < 1e-9;
    Ok((0..count)
        .map(|i| {
            if decimal {
                (k0 + i as f64) / inv
            } else {
                lo + i as f64 * step
            }
        })
        .collect())
}

pub fn table_rows(a_list: &[f64], lambda: f64, gammas: &[f64]) -> anyhow::Result<Vec<ProxRow>> {
    if a_list.is_empty() {
        bail!("no shape parameter given");
    }
    let mut rows = Vec::with_capacity(a_list.len() * gammas.len());
    for &a in a_list {
        let p = PenaltyParams::new(a, lambda)?;
        let t = p.threshold();
        rows.extend(gammas.iter().map(|&gamma| ProxRow {
            a,
            lambda,
            gamma,
            prox: prox_scalar(p, gamma),
            t_star: t.threshold,
            regime: t.regime,
        }));
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[ProxRow]) -> String {
    let mut out = String::from(PROX_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_number(r.a),
            format_number(r.lambda),
            format_number(r.gamma),
            format_number(r.prox),
            format_number(r.t_star),
            regime_name(r.regime)
        );
    }
    out
}

fn rows_to_json(rows: &[ProxRow]) -> anyhow::Result<String> {
    let docs: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "a": r.a,
                "lambda": r.lambda,
                "gamma": r.gamma,
                "prox": r.prox,
                "t_star": r.t_star,
                "regime": regime_name(r.regime),
            })
        })
        .collect();
    Ok(serde_json::to_string_pretty(&docs)?)
}

/// A row passes when it lies within [`VALIDATE_TOL`] of the oracle argmin, or
/// when its objective ties the oracle's (the two minimisers of a jump point).
pub fn check_row(row: &ProxRow) -> anyhow::Result<Option<String>> {
    let p = PenaltyParams::new(row.a, row.lambda)?;
    let best = prox_refined(p, row.gamma);
    let gap = (row.prox - best.argmin).abs();
    if gap <= VALIDATE_TOL {
        return Ok(None);
    }
    let value = scalar_objective(p, row.prox, row.gamma);
    if value <= best.value + 1e-12 {
        return Ok(None);
    }
    Ok(Some(format!(
        "a={} lambda={} gamma={}: prox={} oracle={} (objective {} vs {})",
        row.a, row.lambda, row.gamma, row.prox, best.argmin, value, best.value
    )))
}

pub fn run(args: ProxTableArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let a_list = if !args.a.is_empty() {
        args.a.clone()
    } else {
        file.a
            .as_ref()
            .map_or_else(|| vec![1.0, 2.0, 3.0, 5.0], |a| a.to_vec())
    };
    let lambda = args.lambda.or(file.lambda).unwrap_or(0.25);
    let lo = args.gamma_min.or(file.gamma_min).unwrap_or(-5.0);
    let hi = args.gamma_max.or(file.gamma_max).unwrap_or(5.0);
    let step = args.step.or(file.step).unwrap_or(0.01);
    let format = args.format.or(file.format).unwrap_or(Format::Csv);

    let gammas = gamma_grid(lo, hi, step)?;
    let rows = table_rows(&a_list, lambda, &gammas)?;
    let text = match format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json | Format::Jsonl => rows_to_json(&rows)?,
    };
    let out = args.out.clone().or_else(|| file.out.clone());
    emit(out.as_deref(), &text)?;

    if !args.validate {
        return Ok(EXIT_OK);
    }
    let mut failures = 0usize;
    for row in &rows {
        if let Some(msg) = check_row(row)? {
            failures += 1;
            eprintln!("mismatch: {msg}");
        }
    }
    eprintln!("validated {} rows, {} mismatches", rows.len(), failures);
    Ok(if failures == 0 { EXIT_OK } else { EXIT_USAGE })
}
