//! Command-line front end for `exobounds`.
//!
//! `run` parses the arguments, executes one subcommand and returns the exit
//! code: 0 on success, 1 on a validation error, 2 on a data error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use exobounds::bounds::{
    att_identified_set, mean_bounds_y0, qtt_identified_set, quantile_bounds_y0, rank_cdf_bounds, AssumptionKind,
    AssumptionSpec, BoundCurve, BoundInterval, TreatmentMarginal,
};
use exobounds::dist::Cdf;
use exobounds::estimate::{
    delta_grid, ingest_csv, run_pipeline, Bandwidth, CellRule, IngestConfig, IngestReport, Param, PipelineConfig,
};
use exobounds::oracle::{lp_extremal_cdf_simplex, max_gap_vs_analytic, simulate_joint, synthetic_panel, DiscretizedProblem, Sense};
use exobounds::selection::{
    check_mean_independence, check_t_independence, check_u_independence, count_direction_changes, PropensityScore, TSet,
    DEFAULT_CHECK_TOL,
};
use rayon::prelude::*;
use serde::Serialize;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "EXOBOUNDS_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn field(field: &str, err: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{field}: {err}"))
    }
}

impl From<exobounds::Error> for CliError {
    fn from(e: exobounds::Error) -> Self {
        use exobounds::Error as E;
        match e {
            E::MissingColumn(_) | E::Data { .. } | E::Io { .. } | E::Csv(_) | E::Json(_) => CliError::Data(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "exobounds",
    version,
    about = "Exogeneity checks for latent selection models and sharp bounds under quantile independence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a latent propensity score p(y) = P(X = 1 | Y_x = y) for
    /// T-independence (average-value characterization), U-independence or
    /// mean independence, and count its direction changes.
    Check(CheckArgs),
    /// Sharp bounds on the counterfactual Y0 | X = 1 under T- or
    /// U-independence: cdf, quantile and mean bounds, and ATT/QTT identified
    /// sets.
    Bounds(BoundsArgs),
    /// Sensitivity curves of CATT/CQTT identified sets over U = T = [δ, 1-δ]
    /// in each covariate cell, with breakdown points δ_bp.
    Sensitivity(SensitivityArgs),
    /// Compare the analytic cdf bounds with brute-force LP extremal cdfs
    /// over discretized propensity scores, and print the max gap.
    Oracle(OracleArgs),
    /// Draw (Y, X) from an outcome distribution and a latent propensity
    /// score, or generate the synthetic wage panel, as dataset CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Propensity score JSON: a list of {"lo", "hi", "slope", "intercept"} pieces.
    #[arg(long)]
    score: PathBuf,
    /// Outcome distribution: unif01, uniform:L:R, normal or normal:MEAN:SD.
    #[arg(long, default_value = "unif01")]
    dist: String,
    /// T-independence set: comma-separated points, or an interval LO..HI.
    #[arg(long = "T")]
    t: Option<String>,
    /// U-independence interval LO..HI (or LO,HI).
    #[arg(long = "U")]
    u: Option<String>,
    /// Also test mean independence.
    #[arg(long)]
    mean: bool,
    /// Tolerance for the average-value gaps.
    #[arg(long, default_value_t = DEFAULT_CHECK_TOL)]
    tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundParam {
    /// Conditional cdf of the rank F(Y0) given X = 1.
    #[value(name = "cdf-Y0", alias = "cdf-y0", alias = "cdf")]
    Cdf,
    /// Quantile of Y0 given X = 1.
    #[value(name = "quantile-Y0", alias = "quantile-y0", alias = "quantile")]
    Quantile,
    /// Mean of Y0 given X = 1.
    #[value(name = "mean-Y0", alias = "mean-y0", alias = "mean")]
    Mean,
    /// Average treatment effect on the treated; needs --obs-mean.
    #[value(name = "ATT", alias = "att")]
    Att,
    /// Quantile treatment effect on the treated; needs --at and --obs-quantile.
    #[value(name = "QTT", alias = "qtt")]
    Qtt,
}

#[derive(Debug, Args)]
struct AssumptionArgs {
    /// Assumption: T, U, full or none.
    #[arg(long, default_value = "T")]
    kind: AssumptionKind,
    /// Relaxation δ: the interval [δ, 1-δ] in quantile units.
    #[arg(long)]
    delta: Option<f64>,
    /// Lower end of the interval in quantile units; overrides --delta.
    #[arg(long)]
    a: Option<f64>,
    /// Upper end of the interval in quantile units; overrides --delta.
    #[arg(long)]
    b: Option<f64>,
}

impl AssumptionArgs {
    fn spec(&self) -> CliResult<AssumptionSpec> {
        match self.kind {
            AssumptionKind::Full => return Ok(AssumptionSpec::full()),
            AssumptionKind::None => return Ok(AssumptionSpec::none()),
            _ => {}
        }
        match (self.a, self.b, self.delta) {
            (Some(a), Some(b), _) => AssumptionSpec::new(self.kind, a, b).map_err(|e| CliError::field("--a/--b", e)),
            (Some(_), None, _) => Err(CliError::field("--b", "required together with --a")),
            (None, Some(_), _) => Err(CliError::field("--a", "required together with --b")),
            (None, None, Some(d)) => AssumptionSpec::from_delta(self.kind, d).map_err(|e| CliError::field("--delta", e)),
            (None, None, None) => Err(CliError::field("--delta", "give --delta or both --a and --b")),
        }
    }
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    assumption: AssumptionArgs,
    /// Treatment share P(X = 1).
    #[arg(long)]
    p1: f64,
    /// Target parameter.
    #[arg(long, value_enum, default_value = "mean-Y0")]
    param: BoundParam,
    /// Distribution of Y | X = 0 whose quantile function enters the bounds:
    /// identity (= unif01), uniform:L:R, normal or normal:MEAN:SD.
    #[arg(long, default_value = "identity")]
    quantiles: String,
    /// Evaluation point: quantile level τ, or rank u for cdf-Y0. Without it,
    /// cdf and quantile bounds are written as a curve.
    #[arg(long, alias = "tau")]
    at: Option<f64>,
    /// Number of equispaced points on [0, 1] for curves.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Observed E(Y | X = 1), for ATT.
    #[arg(long)]
    obs_mean: Option<f64>,
    /// Observed Q(τ | X = 1), for QTT.
    #[arg(long)]
    obs_quantile: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SensitivityArgs {
    /// Dataset CSV with a header row.
    #[arg(required_unless_present = "synthetic")]
    data: Option<PathBuf>,
    /// Column mapping and filters (JSON), e.g.
    /// {"outcome":"logwage","treatment":"not_abducted","covariates":["age","hhsize"]}.
    #[arg(long, required_unless_present = "synthetic")]
    config: Option<PathBuf>,
    /// Use the synthetic wage panel with this many rows instead of a file.
    #[arg(long, conflicts_with_all = ["data", "config"])]
    synthetic: Option<usize>,
    /// Output directory for curve CSVs, summary.json and run.json.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seed for the synthetic panel; EXOBOUNDS_SEED overrides it.
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    /// Points on the δ grid over [0, 0.5].
    #[arg(long, default_value_t = exobounds::estimate::DEFAULT_DELTA_POINTS)]
    deltas: usize,
    /// Kernel bandwidth: silverman or a fixed value (0 = empirical cdf).
    #[arg(long, default_value = "silverman")]
    bandwidth: Bandwidth,
    /// Cell construction: median-split or exact-levels.
    #[arg(long, default_value = "median-split")]
    rule: CellRule,
    /// Parameters, e.g. CATT,CQTT(0.5).
    #[arg(long, value_delimiter = ',', default_value = "CATT,CQTT(0.5)")]
    params: Vec<Param>,
    /// Assumption kinds (T and/or U).
    #[arg(long, value_delimiter = ',', default_value = "T,U")]
    kinds: Vec<AssumptionKind>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Grid size over the rank scale.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[command(flatten)]
    assumption: AssumptionArgs,
    /// Treatment share P(X = 1).
    #[arg(long, default_value_t = 0.5)]
    p1: f64,
    /// Points in the u-grid on which the gap is measured.
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Also solve every extremum with the simplex method and report the
    /// largest disagreement with the exact greedy solution.
    #[arg(long)]
    simplex: bool,
    /// Run the full suite: both kinds, p1 ∈ {0.25, 0.5, 0.75},
    /// [a, b] ∈ {[0.25, 0.75], [0.1, 0.9], [0.4, 0.4]}, n ∈ {100, 200, 400}.
    #[arg(long, conflicts_with_all = ["n", "kind", "a", "b", "delta", "p1"])]
    suite: bool,
    /// Worker threads for the suite.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Propensity score JSON.
    #[arg(long, required_unless_present = "panel", conflicts_with = "panel")]
    score: Option<PathBuf>,
    /// Generate the synthetic wage panel with this many rows instead.
    #[arg(long)]
    panel: Option<usize>,
    /// Outcome distribution: unif01, uniform:L:R, normal or normal:MEAN:SD.
    #[arg(long, default_value = "unif01")]
    dist: String,
    /// Sample size.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Random seed; EXOBOUNDS_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

/// Output streams and environment for one invocation.
pub struct Io<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    /// Value of `EXOBOUNDS_SEED`, if set.
    pub seed_env: Option<String>,
}

/// Runs the command line `argv` (including the program name) against the
/// process streams and environment.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    let mut io = Io {
        stdout: &mut out,
        stderr: &mut err,
        seed_env: std::env::var(SEED_ENV).ok(),
    };
    run_with(argv, &mut io)
}

pub fn run_with<I, T>(argv: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { io.stderr } else { io.stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(a, io),
        Command::Bounds(a) => bounds(a, io),
        Command::Sensitivity(a) => sensitivity(a, io),
        Command::Oracle(a) => oracle(a, io),
        Command::Simulate(a) => simulate(a, io),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn effective_seed(flag: u64, env: &Option<String>) -> CliResult<u64> {
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::field(SEED_ENV, format!("`{v}` is not an unsigned 64-bit integer"))),
        None => Ok(flag),
    }
}

fn parse_dist(field: &str, spec: &str) -> CliResult<Cdf> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::field(field, format!("`{s}` is not a number")))
    };
    let cdf = match parts.as_slice() {
        ["unif01"] | ["identity"] => Ok(Cdf::unit_uniform()),
        ["uniform", l, r] => Cdf::uniform(num(l)?, num(r)?),
        ["normal"] => Ok(Cdf::standard_normal()),
        ["normal", m, s] => Cdf::normal(num(m)?, num(s)?),
        _ => {
            return Err(CliError::field(
                field,
                format!("unknown distribution `{spec}`; use unif01, identity, uniform:L:R, normal or normal:MEAN:SD"),
            ))
        }
    };
    cdf.map_err(|e| CliError::field(field, e))
}

fn parse_range(field: &str, s: &str) -> CliResult<(f64, f64)> {
    let (l, r) = s
        .split_once("..")
        .or_else(|| s.split_once(','))
        .ok_or_else(|| CliError::field(field, format!("`{s}` is not an interval LO..HI")))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| CliError::field(field, format!("`{v}` is not a number")))
    };
    let (lo, hi) = (num(l)?, num(r)?);
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(CliError::field(field, format!("interval {lo}..{hi} is empty")));
    }
    Ok((lo, hi))
}

fn parse_t_set(s: &str) -> CliResult<TSet> {
    if s.contains("..") {
        let (lo, hi) = parse_range("--T", s)?;
        return Ok(TSet::interval(lo, hi));
    }
    let points = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::field("--T", format!("`{v}` is not a number")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(TSet::Points(points))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn emit(io: &mut Io<'_>, out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => io
            .stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct CheckOutput {
    direction_changes: usize,
    reports: Vec<exobounds::selection::IndependenceReport>,
}

fn check(args: CheckArgs, io: &mut Io<'_>) -> CliResult<()> {
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(CliError::field("--tol", "must be positive"));
    }
    if args.t.is_none() && args.u.is_none() && !args.mean {
        return Err(CliError::field("--T", "give at least one of --T, --U or --mean"));
    }
    let dist = parse_dist("--dist", &args.dist)?;
    let score = PropensityScore::from_json(&read_file(&args.score)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.score.display())))?;
    let mut reports = Vec::new();
    if let Some(t) = &args.t {
        reports.push(check_t_independence(&score, &dist, &parse_t_set(t)?, args.tol).map_err(|e| CliError::field("--T", e))?);
    }
    if let Some(u) = &args.u {
        let (lo, hi) = parse_range("--U", u)?;
        reports.push(check_u_independence(&score, &dist, lo, hi, args.tol).map_err(|e| CliError::field("--U", e))?);
    }
    if args.mean {
        reports.push(check_mean_independence(&score, &dist, args.tol)?);
    }
    let output = CheckOutput {
        direction_changes: count_direction_changes(&score),
        reports,
    };
    emit(io, args.out.as_deref(), &to_json(&output)?)
}

fn grid(points: usize) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err(CliError::field("--grid", "needs at least 2 points"));
    }
    Ok((0..points).map(|i| i as f64 / (points - 1) as f64).collect())
}

fn check_level(v: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::field("--at", format!("{v} is not in [0, 1]")))
    }
}

fn scalar_csv(param: &str, spec: &AssumptionSpec, iv: &BoundInterval) -> String {
    let (a, b) = spec.interval().unwrap_or((f64::NAN, f64::NAN));
    format!(
        "param,kind,a,b,lower,upper\n{param},{},{a},{b},{},{}\n",
        spec.kind().label(),
        iv.lower,
        iv.upper
    )
}

fn bounds(args: BoundsArgs, io: &mut Io<'_>) -> CliResult<()> {
    let spec = args.assumption.spec()?;
    let marg = TreatmentMarginal::new(args.p1).map_err(|e| CliError::field("--p1", e))?;
    let dist = parse_dist("--quantiles", &args.quantiles)?;
    let label = args
        .param
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let text = match args.param {
        BoundParam::Mean => scalar_csv(&label, &spec, &mean_bounds_y0(&spec, &dist, &marg)?),
        BoundParam::Att => {
            let m = args.obs_mean.ok_or_else(|| CliError::field("--obs-mean", "required for ATT"))?;
            scalar_csv(&label, &spec, &att_identified_set(m, &spec, &dist, &marg)?)
        }
        BoundParam::Qtt => {
            let tau = check_level(args.at.ok_or_else(|| CliError::field("--at", "required for QTT"))?)?;
            let q = args
                .obs_quantile
                .ok_or_else(|| CliError::field("--obs-quantile", "required for QTT"))?;
            scalar_csv(&format!("QTT({tau})"), &spec, &qtt_identified_set(tau, q, &spec, &dist, &marg)?)
        }
        BoundParam::Quantile | BoundParam::Cdf => {
            let levels = match args.at {
                Some(v) => vec![check_level(v)?],
                None => grid(args.grid)?,
            };
            let intervals = levels
                .iter()
                .map(|&t| match args.param {
                    BoundParam::Quantile => quantile_bounds_y0(&spec, &dist, &marg, t).map_err(CliError::from),
                    _ => {
                        let (a, b) = spec.interval().unwrap_or((0.0, 0.0));
                        let (lower, upper) = rank_cdf_bounds(spec.kind(), marg.p1(), a, b, t);
                        Ok(BoundInterval { lower, upper })
                    }
                })
                .collect::<CliResult<Vec<_>>>()?;
            BoundCurve::new(spec.kind(), label, levels, intervals)?.to_csv()
        }
    };
    emit(io, args.out.as_deref(), &text)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    source: String,
    /// Effective seed; it only drives `--synthetic` data.
    seed: u64,
    ingest: Option<&'a IngestReport>,
}

fn sensitivity(args: SensitivityArgs, io: &mut Io<'_>) -> CliResult<()> {
    if args.jobs == 0 {
        return Err(CliError::field("--jobs", "must be at least 1"));
    }
    if args.deltas < 2 {
        return Err(CliError::field("--deltas", "needs at least 2 points"));
    }
    if args.params.is_empty() {
        return Err(CliError::field("--params", "give at least one parameter"));
    }
    if let Some(k) = args.kinds.iter().find(|k| !matches!(k, AssumptionKind::T | AssumptionKind::U)) {
        return Err(CliError::field("--kinds", format!("`{}` is not T or U", k.label())));
    }
    let seed = effective_seed(args.seed, &io.seed_env)?;
    let (ds, covariates, report, source) = match (args.synthetic, &args.data, &args.config) {
        (Some(rows), _, _) => {
            let ds = synthetic_panel(rows, seed).map_err(|e| CliError::field("--synthetic", e))?;
            (ds, vec!["age".to_string(), "hhsize".to_string()], None, format!("synthetic panel, {rows} rows"))
        }
        (None, Some(data), Some(config)) => {
            let cfg = IngestConfig::from_path(config)?;
            let (ds, report) = ingest_csv(data, &cfg)?;
            let name = data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            (ds, cfg.covariates.clone(), Some(report), name)
        }
        _ => return Err(CliError::field("--config", "give a dataset and --config, or --synthetic")),
    };
    let mut config = PipelineConfig::new(covariates);
    config.rule = args.rule;
    config.kinds = args.kinds.clone();
    config.params = args.params.clone();
    config.deltas = delta_grid(args.deltas);
    config.bandwidth = args.bandwidth;
    config.jobs = args.jobs;
    let summary = run_pipeline(&ds, &config, &args.out)?;
    let manifest = RunManifest {
        source,
        seed,
        ingest: report.as_ref(),
    };
    let path = args.out.join("run.json");
    std::fs::write(&path, to_json(&manifest)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for w in &summary.warnings {
        let _ = writeln!(io.stderr, "warning: {w}");
    }
    let mut text = format!("{} rows, {} cells\n", summary.rows, summary.cells.len());
    for cell in &summary.cells {
        if let Some(reason) = &cell.skipped {
            text.push_str(&format!("cell {} [{}]: skipped, {reason}\n", cell.index, cell.label));
            continue;
        }
        for b in &cell.breakdowns {
            let value = b
                .breakdown
                .map(|d| format!("{:.6}", d.delta))
                .unwrap_or_else(|| "n/a".to_string());
            text.push_str(&format!("cell {} [{}] {} {}: breakdown {value}\n", cell.index, cell.label, b.param, b.kind.label()));
        }
    }
    emit(io, None, &text)
}

struct OracleCase {
    kind: AssumptionKind,
    n: usize,
    p1: f64,
    a: f64,
    b: f64,
}

struct OracleOutcome {
    gap: f64,
    simplex_gap: Option<f64>,
}

fn run_oracle_case(c: &OracleCase, points: usize, simplex: bool) -> CliResult<OracleOutcome> {
    let prob = DiscretizedProblem::new(c.kind, c.n, c.p1, c.a, c.b)?;
    let u: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let gap = max_gap_vs_analytic(&prob, &u);
    let simplex_gap = if simplex {
        let mut worst = 0.0f64;
        for &x in &u {
            for sense in [Sense::Min, Sense::Max] {
                let s = lp_extremal_cdf_simplex(&prob, x, sense)?;
                let g = exobounds::oracle::lp_extremal_cdf(&prob, x, sense);
                worst = worst.max((s - g).abs());
            }
        }
        Some(worst)
    } else {
        None
    };
    Ok(OracleOutcome { gap, simplex_gap })
}

fn oracle(args: OracleArgs, io: &mut Io<'_>) -> CliResult<()> {
    if args.points < 2 {
        return Err(CliError::field("--points", "needs at least 2 points"));
    }
    if args.jobs == 0 {
        return Err(CliError::field("--jobs", "must be at least 1"));
    }
    let cases: Vec<OracleCase> = if args.suite {
        let mut v = Vec::new();
        for kind in [AssumptionKind::T, AssumptionKind::U] {
            for p1 in [0.25, 0.5, 0.75] {
                for (a, b) in [(0.25, 0.75), (0.1, 0.9), (0.4, 0.4)] {
                    for n in [100, 200, 400] {
                        v.push(OracleCase { kind, n, p1, a, b });
                    }
                }
            }
        }
        v
    } else {
        if args.n == 0 {
            return Err(CliError::field("--n", "must be at least 1"));
        }
        TreatmentMarginal::new(args.p1).map_err(|e| CliError::field("--p1", e))?;
        let spec = args.assumption.spec()?;
        let (a, b) = spec.interval().unwrap_or((0.0, 0.0));
        vec![OracleCase {
            kind: spec.kind(),
            n: args.n,
            p1: args.p1,
            a,
            b,
        }]
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("--jobs: {e}")))?;
    let outcomes: Vec<CliResult<OracleOutcome>> =
        pool.install(|| cases.par_iter().map(|c| run_oracle_case(c, args.points, args.simplex)).collect());
    let mut text = String::from("kind,p1,a,b,n,max_gap,tolerance,within");
    if args.simplex {
        text.push_str(",simplex_gap");
    }
    text.push('\n');
    let mut worst = 0.0f64;
    for (c, o) in cases.iter().zip(outcomes) {
        let o = o?;
        let tol = 2.0 / c.n as f64;
        worst = worst.max(o.gap);
        text.push_str(&format!(
            "{},{},{},{},{},{:.3e},{},{}",
            c.kind.label(),
            c.p1,
            c.a,
            c.b,
            c.n,
            o.gap,
            tol,
            o.gap <= tol
        ));
        if let Some(s) = o.simplex_gap {
            text.push_str(&format!(",{s:.3e}"));
        }
        text.push('\n');
    }
    text.push_str(&format!("max gap: {worst:.3e}\n"));
    emit(io, None, &text)
}

fn simulate(args: SimulateArgs, io: &mut Io<'_>) -> CliResult<()> {
    let seed = effective_seed(args.seed, &io.seed_env)?;
    if let Some(rows) = args.panel {
        let ds = synthetic_panel(rows, seed).map_err(|e| CliError::field("--panel", e))?;
        ds.write_csv(&args.out)?;
        let _ = writeln!(io.stdout, "wrote {} rows to {}", ds.len(), args.out.display());
        return Ok(());
    }
    let path = args.score.as_deref().expect("clap requires --score without --panel");
    let score =
        PropensityScore::from_json(&read_file(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let dist = parse_dist("--dist", &args.dist)?;
    if args.n == 0 {
        return Err(CliError::field("--n", "must be at least 1"));
    }
    let sim = simulate_joint(&score, &dist, args.n, seed)?;
    if let Some(w) = &sim.warning {
        let _ = writeln!(io.stderr, "warning: {w}");
    }
    sim.dataset.write_csv(&args.out)?;
    let _ = writeln!(
        io.stdout,
        "wrote {} rows to {} (treatment share {})",
        sim.dataset.len(),
        args.out.display(),
        sim.treatment_share
    );
    Ok(())
}
