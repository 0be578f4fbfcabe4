//! Command-line front end: reproducible, seeded runs of every library
//! operation with CSV/JSON output and a JSON manifest alongside every
//! output file.
//!
//! Configuration comes from flags or a JSON config file (`--config`);
//! flags override file values. Presentation tables are rounded; machine
//! files carry 17 significant digits.

use crate::conditional::{
    activity_prob, bh_ratio, bh_threshold, conditional_decomposition, tweedie_moment,
};
use crate::densities::{psi_density, CmModel};
use crate::fit::{fit_cm, fit_laplace_zeta, fit_rho_d};
use crate::measures::{
    scale_family_rate, slab_activity_factor, ExceedanceMeasure, ScaleFamily,
};
use crate::simulate::{exceedance_check, observe, sample_signal, SignalKind, SignalSpec};
use crate::zeta::ZetaEvaluator;
use crate::{Error, Result};
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CommandName {
    ZetaTable,
    PsiCurve,
    MarginalCurve,
    Quantiles,
    Simulate,
    Fit,
    ActivityCurve,
    Conditional,
    Bh,
    CheckExceedance,
}

impl CommandName {
    fn as_str(self) -> &'static str {
        match self {
            Self::ZetaTable => "zeta-table",
            Self::PsiCurve => "psi-curve",
            Self::MarginalCurve => "marginal-curve",
            Self::Quantiles => "quantiles",
            Self::Simulate => "simulate",
            Self::Fit => "fit",
            Self::ActivityCurve => "activity-curve",
            Self::Conditional => "conditional",
            Self::Bh => "bh",
            Self::CheckExceedance => "check-exceedance",
        }
    }

    fn default_out(self) -> &'static str {
        match self {
            Self::ZetaTable => "zeta_table.csv",
            Self::PsiCurve => "psi_curve.csv",
            Self::MarginalCurve => "marginal_curve.csv",
            Self::Quantiles => "quantiles.csv",
            Self::Simulate => "simulated.csv",
            Self::Fit => "fit.json",
            Self::ActivityCurve => "activity_curve.csv",
            Self::Conditional => "conditional.json",
            Self::Bh => "bh.json",
            Self::CheckExceedance => "exceedance_report.json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModelName {
    Powerzeta,
    Cm,
    Laplace,
}

/// One run of the tool.
#[derive(Parser, Debug)]
#[command(
    name = "exceedance",
    about = "Sparse-limit inference for the signal-plus-Gaussian-noise model",
    version
)]
struct Cli {
    /// Operation to run.
    #[arg(value_enum)]
    command: CommandName,
    /// JSON config file; flags given on the command line override its values.
    /// A previously written manifest is accepted (its `params` are used).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (a `.manifest.json` sidecar is written next to it).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input data file (one-column CSV) for `fit`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Model for `fit` / `marginal-curve`: powerzeta, cm, or laplace.
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    /// Sparsity rate ρ.
    #[arg(long)]
    rho: Option<f64>,
    /// Inverse-power index d.
    #[arg(long)]
    d: Option<f64>,
    /// Signal scale σ₀ of the convolution-mixture model.
    #[arg(long)]
    sigma0: Option<f64>,
    /// Slab-width parameter λ of the Laplace-difference family.
    #[arg(long)]
    lambda: Option<f64>,
    /// Evaluation grid "a:b:step" (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Quantile levels in percent, comma-separated, e.g. "97,98,99".
    #[arg(long)]
    quantiles: Option<String>,
    /// Observation point y for `conditional`.
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    /// Target false discovery rate q for `bh`.
    #[arg(long)]
    q: Option<f64>,
    /// Exceedance threshold ε for `check-exceedance`.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Sample count (draws for `simulate`, draws per level for
    /// `check-exceedance`).
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated ρ grid for `activity-curve`.
    #[arg(long)]
    rho_grid: Option<String>,
    /// Comma-separated sparsity-parameter grid for `check-exceedance`.
    #[arg(long)]
    nu_grid: Option<String>,
}

/// Serializable parameter set: the merge of config-file values and flags.
/// This is what the manifest records and what `--config` re-reads.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantiles: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_grid: Option<String>,
    /// Signal law for `simulate` / `check-exceedance` (config file only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalSpec>,
}

impl RunConfig {
    /// Overlays command-line flags on top of the config-file values.
    fn merge_flags(mut self, cli: &Cli) -> Self {
        macro_rules! take {
            ($field:ident) => {
                if cli.$field.is_some() {
                    self.$field = cli.$field.clone();
                }
            };
        }
        take!(seed);
        take!(out);
        take!(input);
        take!(model);
        take!(rho);
        take!(d);
        take!(sigma0);
        take!(lambda);
        take!(grid);
        take!(quantiles);
        take!(y);
        take!(q);
        take!(epsilon);
        take!(n);
        take!(rho_grid);
        take!(nu_grid);
        self
    }
}

#[derive(Serialize)]
struct Versions {
    name: &'static str,
    version: &'static str,
}

/// JSON manifest written next to every output file.
#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    params: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    versions: Versions,
    wall_time_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Parses, dispatches, writes the manifest, and returns the process exit
/// code (0 success, 2 bad arguments, 3 numeric failure).
pub fn run() -> i32 {
    let cli = Cli::parse();
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cli.command.default_out()));
    let start = Instant::now();
    let result = dispatch(cli.command, &config, &out);
    let manifest = Manifest {
        command: cli.command.as_str(),
        params: &config,
        seed: config.seed,
        versions: Versions {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        wall_time_seconds: start.elapsed().as_secs_f64(),
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    let manifest_path = manifest_path_for(&out);
    if let Ok(text) = serde_json::to_string_pretty(&manifest) {
        let _ = std::fs::write(&manifest_path, text + "\n");
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let base = match &cli.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            // accept either a bare config or a manifest with a `params` key
            let params = value.get("params").cloned().unwrap_or(value);
            serde_json::from_value(params)?
        }
    };
    Ok(base.merge_flags(cli))
}

// ---------------------------------------------------------------------------
// Shared parsing and formatting helpers
// ---------------------------------------------------------------------------

/// Parses "a:b:step" into the inclusive grid a, a+step, …, b.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::BadArgument(format!(
            "grid must be \"a:b:step\", got {text:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadArgument(format!("bad grid number {p:?}")))
        })
        .collect::<Result<_>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0 && b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::BadArgument(format!(
            "grid needs b >= a and step > 0, got {text:?}"
        )));
    }
    let count = ((b - a) / step).round() as usize;
    let mut grid = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let x = a + step * i as f64;
        if x <= b + step * 1e-9 {
            grid.push(x);
        }
    }
    Ok(grid)
}

/// Parses a comma-separated list of reals.
fn parse_list(text: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadArgument(format!("bad list entry {p:?}")))
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::BadArgument("empty list".into()));
    }
    Ok(out)
}

/// Machine format: 17 significant digits.
fn machine(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse::<f64>().map_err(|_| {
            Error::BadArgument(format!("line {}: not a number: {t:?}", lineno + 1))
        })?);
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(path, &(text + "\n"))
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn dispatch(command: CommandName, config: &RunConfig, out: &Path) -> Result<()> {
    match command {
        CommandName::ZetaTable => cmd_zeta_table(config, out),
        CommandName::PsiCurve => cmd_psi_curve(config, out),
        CommandName::MarginalCurve => cmd_marginal_curve(config, out),
        CommandName::Quantiles => cmd_quantiles(config, out),
        CommandName::Simulate => cmd_simulate(config, out),
        CommandName::Fit => cmd_fit(config, out),
        CommandName::ActivityCurve => cmd_activity_curve(config, out),
        CommandName::Conditional => cmd_conditional(config, out),
        CommandName::Bh => cmd_bh(config, out),
        CommandName::CheckExceedance => cmd_check_exceedance(config, out),
    }
}

fn cm_model(config: &RunConfig) -> Result<CmModel<f64>> {
    let rho = config.rho.unwrap_or(0.05);
    let d = config.d.unwrap_or(1.0);
    let sigma0 = config.sigma0.unwrap_or(0.0);
    CmModel::new(rho, d, 1.0 + sigma0 * sigma0)
}

/// Presentation table of ζ_d(x), one decimal, for d ∈ {0.5, 1.0, 1.5}
/// (or a single `--d`) on the default grid x = 2.0 … 4.4 step 0.2.
fn cmd_zeta_table(config: &RunConfig, out: &Path) -> Result<()> {
    let xs = parse_grid(config.grid.as_deref().unwrap_or("2.0:4.4:0.2"))?;
    let ds = match config.d {
        Some(d) => vec![d],
        None => vec![0.5, 1.0, 1.5],
    };
    let evals: Vec<ZetaEvaluator<f64>> = ds
        .iter()
        .map(|&d| ZetaEvaluator::new(ExceedanceMeasure::inverse_power(d)?))
        .collect::<Result<_>>()?;
    let mut text = String::from("x");
    for d in &ds {
        write!(text, ",d={d}").expect("string write");
    }
    text.push('\n');
    for &x in &xs {
        write!(text, "{x:.1}").expect("string write");
        for ev in &evals {
            write!(text, ",{:.1}", ev.zeta(x)?).expect("string write");
        }
        text.push('\n');
    }
    write_file(out, &text)
}

/// Machine table of the tail-inflation density ψ_d on a grid.
fn cmd_psi_curve(config: &RunConfig, out: &Path) -> Result<()> {
    let xs = parse_grid(config.grid.as_deref().unwrap_or("-5.0:5.0:0.1"))?;
    let d = config.d.unwrap_or(1.0);
    let ev = ZetaEvaluator::new(ExceedanceMeasure::inverse_power(d)?)?;
    let mut text = String::from("x,psi\n");
    for &x in &xs {
        writeln!(text, "{},{}", machine(x), machine(psi_density(&ev, x)?)).expect("string write");
    }
    write_file(out, &text)
}

/// Machine table of the marginal observation density on a grid.
fn cmd_marginal_curve(config: &RunConfig, out: &Path) -> Result<()> {
    let xs = parse_grid(config.grid.as_deref().unwrap_or("-6.0:6.0:0.1"))?;
    let model = cm_model(config)?;
    let mut text = String::from("y,density\n");
    for &x in &xs {
        writeln!(
            text,
            "{},{}",
            machine(x),
            machine(model.marginal_density(x)?)
        )
        .expect("string write");
    }
    write_file(out, &text)
}

/// Machine table of |Y| quantiles at the requested percent levels.
fn cmd_quantiles(config: &RunConfig, out: &Path) -> Result<()> {
    let levels = parse_list(config.quantiles.as_deref().unwrap_or("97,98,99,99.5,99.75"))?;
    let model = cm_model(config)?;
    let mut text = String::from("percent,quantile\n");
    for &p in &levels {
        if !(p > 0.0 && p < 100.0) {
            return Err(Error::BadArgument(format!(
                "percent level must lie in (0, 100), got {p}"
            )));
        }
        let q = model.quantile(p / 100.0, true)?;
        writeln!(text, "{p},{}", machine(q)).expect("string write");
    }
    write_file(out, &text)
}

/// Draws observations `y = μ + ε`: the signal law comes from the config
/// (default: the deterministic log-spaced sequence with n = 5000, k = 500),
/// the noise from `--seed`. One value per line, no header.
fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<()> {
    let seed = config.seed.unwrap_or(0);
    let spec = config.signal.clone().unwrap_or(SignalSpec {
        kind: SignalKind::Efron { n: 5000, k: 500 },
        seed,
    });
    let count = config.n.unwrap_or(5000);
    let signals = sample_signal(&spec, count)?;
    let y = observe(&signals, seed);
    let mut text = String::new();
    for v in &y {
        writeln!(text, "{}", machine(*v)).expect("string write");
    }
    write_file(out, &text)
}

/// Fits the chosen model to a one-column CSV of observations and writes the
/// result as JSON.
fn cmd_fit(config: &RunConfig, out: &Path) -> Result<()> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| Error::BadArgument("fit requires --input".into()))?;
    let y = read_column(input)?;
    let fit = match config.model.unwrap_or(ModelName::Powerzeta) {
        ModelName::Powerzeta => fit_rho_d(&y)?,
        ModelName::Cm => fit_cm(&y)?,
        ModelName::Laplace => fit_laplace_zeta(&y, config.lambda.unwrap_or(0.0))?,
    };
    write_json(out, &fit)
}

/// Machine table of the activity probability over a y grid, one column per
/// ρ in the ρ grid (default 4^{−k}, k = 1…4).
fn cmd_activity_curve(config: &RunConfig, out: &Path) -> Result<()> {
    let ys = parse_grid(config.grid.as_deref().unwrap_or("0.0:5.0:0.1"))?;
    let rhos = parse_list(
        config
            .rho_grid
            .as_deref()
            .unwrap_or("0.25,0.0625,0.015625,0.00390625"),
    )?;
    let d = config.d.unwrap_or(1.0);
    let ev = ZetaEvaluator::new(ExceedanceMeasure::inverse_power(d)?)?;
    let mut text = String::from("y");
    for r in &rhos {
        write!(text, ",rho={r}").expect("string write");
    }
    text.push('\n');
    for &y in &ys {
        write!(text, "{}", machine(y)).expect("string write");
        for &r in &rhos {
            write!(text, ",{}", machine(activity_prob(r, &ev, y)?)).expect("string write");
        }
        text.push('\n');
    }
    write_file(out, &text)
}

#[derive(Serialize)]
struct ConditionalReport {
    y: f64,
    standardized_y: f64,
    activity_prob: f64,
    tweedie_mean: f64,
    w_central: f64,
    w_intermediate: f64,
    w_zeta_remainder: f64,
    is_split: bool,
}

/// Conditional inference at one observation point: activity probability,
/// posterior mean, and the three-part component weights. The zeta-based
/// quantities are evaluated on the standardized scale y/σ.
fn cmd_conditional(config: &RunConfig, out: &Path) -> Result<()> {
    let y = config
        .y
        .ok_or_else(|| Error::BadArgument("conditional requires --y".into()))?;
    let model = cm_model(config)?;
    let z = y / model.sigma();
    let decomposition = conditional_decomposition(&model, y, None)?;
    let report = ConditionalReport {
        y,
        standardized_y: z,
        activity_prob: activity_prob(model.rho(), model.zeta(), z)?,
        tweedie_mean: tweedie_moment(model.rho(), model.zeta(), z, 1)?,
        w_central: decomposition.w_central(),
        w_intermediate: decomposition.w_intermediate(),
        w_zeta_remainder: decomposition.w_zeta_remainder(),
        is_split: decomposition.is_split(),
    };
    write_json(out, &report)
}

#[derive(Serialize)]
struct BhReport {
    q: f64,
    threshold: f64,
    ratio_at_threshold: f64,
}

/// Asymptotic Benjamini-Hochberg threshold for the fitted marginal.
fn cmd_bh(config: &RunConfig, out: &Path) -> Result<()> {
    let q = config.q.unwrap_or(0.1);
    let model = cm_model(config)?;
    let threshold = bh_threshold(&model, q)?;
    let report = BhReport {
        q,
        threshold,
        ratio_at_threshold: bh_ratio(&model, threshold)?,
    };
    write_json(out, &report)
}

/// Empirical sparse-limit convergence report for a scale or atom-and-slab
/// family with a known sparsity rate.
fn cmd_check_exceedance(config: &RunConfig, out: &Path) -> Result<()> {
    let spec = config.signal.clone().unwrap_or(SignalSpec {
        kind: SignalKind::CauchyScale { sigma: 0.1 },
        seed: config.seed.unwrap_or(0),
    });
    let epsilon = config.epsilon.unwrap_or(1.0);
    let nus = parse_list(config.nu_grid.as_deref().unwrap_or("0.1,0.03,0.01"))?;
    let samples = config.n.unwrap_or(1_000_000);
    let rate: Box<dyn Fn(f64) -> Result<f64>> = match &spec.kind {
        SignalKind::CauchyScale { .. } => {
            Box::new(|sigma| scale_family_rate(ScaleFamily::Cauchy, sigma))
        }
        SignalKind::AtomSlab { slab, .. } => {
            let k = slab_activity_factor(&slab.to_slab::<f64>())?;
            Box::new(move |nu| Ok(k * nu))
        }
        other => {
            return Err(Error::BadArgument(format!(
                "no closed-form sparsity rate for this family: {other:?}"
            )))
        }
    };
    let report = exceedance_check(&spec, epsilon, rate.as_ref(), &nus, samples)?;
    write_json(out, &report)
}
