//! Command-line front end.
//!
//! Every flag may also be given in a JSON config file (`--config`) under the
//! same name in snake_case (`max_iter` for `--max-iter`). Flags win over the
//! file; for seeds the `QUASISPARSE_SEED` environment variable is consulted
//! last, before the built-in default.
//!
//! Exit codes: 0 success (or converged solve), 1 usage or input error,
//! 2 solve stopped at `max_iter`.

pub mod prox_table;
mod solve;
mod sweep;
pub mod validate;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::experiment::{ReferencePoint, DEFAULT_MASTER_SEED};
use crate::solver::Algorithm;

pub const SEED_ENV: &str = "QUASISPARSE_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "quasisparse",
    version,
    about = "Sparse recovery from quasi-linear measurements"
)]
pub struct Cli {
    /// JSON file providing defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance, loaded from files or generated from a seed.
    Solve(solve::SolveArgs),
    /// Success-rate sweep over sparsity levels.
    Sweep(sweep::SweepArgs),
    /// Tabulate the fraction-penalty prox over a range of inputs.
    ProxTable(prox_table::ProxTableArgs),
    /// Run the brute-force oracle and operator self-checks.
    Validate(validate::ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceArg {
    TrueSignal,
    Independent,
}

impl From<ReferenceArg> for ReferencePoint {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::TrueSignal => ReferencePoint::TrueSignal,
            ReferenceArg::Independent => ReferencePoint::Independent,
        }
    }
}

/// Problem and solver flags shared by `solve` and `sweep`.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    /// Fraction-penalty shape parameter.
    #[arg(long)]
    pub a: Option<f64>,
    /// Nonlinearity scale of the log-shift operator.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Step-size margin in (0, 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Relative-change stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of measurements.
    #[arg(long)]
    pub m: Option<usize>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceArg>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub algorithm: Option<StringOrList>,
    pub a: Option<NumberOrList>,
    pub r: Option<usize>,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub levels: Option<StringOrList>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub reference: Option<ReferenceArg>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trace: Option<PathBuf>,
    pub operator: Option<PathBuf>,
    pub measurements: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub step: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StringOrList {
    Text(String),
    List(Vec<serde_json::Value>),
}

impl StringOrList {
    /// Flatten into the comma-separated form the flags use.
    pub fn as_text(&self) -> String {
        match self {
            StringOrList::Text(s) => s.clone(),
            StringOrList::List(items) => items
                .iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberOrList {
    One(f64),
    Many(Vec<f64>),
}

impl NumberOrList {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            NumberOrList::One(x) => vec![*x],
            NumberOrList::Many(xs) => xs.clone(),
        }
    }

    pub fn single(&self) -> anyhow::Result<f64> {
        match self {
            NumberOrList::One(x) => Ok(*x),
            NumberOrList::Many(xs) if xs.len() == 1 => Ok(xs[0]),
            NumberOrList::Many(_) => bail!("`a` must be a single number here"),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))
    }
}

/// Flag, then config file, then `QUASISPARSE_SEED`, then the default.
pub(crate) fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> anyhow::Result<u64> {
    if let Some(seed) = flag.or(file) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={text:?} is not an unsigned integer")),
        Err(_) => Ok(DEFAULT_MASTER_SEED),
    }
}

pub(crate) fn parse_algorithms(text: &str) -> anyhow::Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let alg: Algorithm = part.parse()?;
        if !out.contains(&alg) {
            out.push(alg);
        }
    }
    if out.is_empty() {
        bail!("no algorithm given");
    }
    Ok(out)
}

/// `"1..15"` (inclusive), `"1,2,5"` or a mix such as `"1..3,8"`.
pub(crate) fn parse_levels(text: &str) -> anyhow::Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: usize = lo
                .trim()
                .parse()
                .with_context(|| format!("bad level range `{part}`"))?;
            let hi: usize = hi
                .trim()
                .parse()
                .with_context(|| format!("bad level range `{part}`"))?;
            if hi < lo {
                bail!("empty level range `{part}`");
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                part.parse()
                    .with_context(|| format!("bad level `{part}`"))?,
            );
        }
    }
    if out.is_empty() {
        bail!("no sparsity levels given");
    }
    Ok(out)
}

/// Write `text` to `path`, or to standard output when `path` is `None`.
pub(crate) fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Parse `args` and run the selected command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Solve(args) => solve::run(args, &file),
        Command::Sweep(args) => sweep::run(args, &file),
        Command::ProxTable(args) => prox_table::run(args, &file),
        Command::Validate(args) => validate::run_cli(args, &file),
    }
}
