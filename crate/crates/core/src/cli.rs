//! Command-line surface: `audit`, `postprocess`, `apply`, `simulate` and
//! `fixture`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 estimation or
//! optimization error, 3 an audited ε exceeded `--fail-above`. Every seeded
//! command reads its default seed from `FAIRSECT_SEED` (else 0).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimation::{mse_study, Method, Prior, StudyConfig, DEFAULT_LEVEL};
use crate::io::{
    run_audit, sha256_hex, AuditReport, AuditSettings, CsvTable, FitManifest, InputManifest,
    ParamsFile,
};
use crate::metrics::{FairnessMetric, Smoothing};
use crate::postprocess::{
    apply_to_scores, optimize_deterministic, optimize_overall, optimize_randomization,
    optimize_sequential, FairnessConstraint, LossSpec, ModelStats, SearchConfig,
};
use crate::rng::RngStream;
use crate::synth::{adult, convergence_experiment, default_planted_rates, ExperimentConfig};

pub const SEED_ENV: &str = "FAIRSECT_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_ESTIMATION: i32 = 2;
pub const EXIT_GATE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "fairsect",
    version,
    about = "Intersectional ε-differential fairness audits and post-processing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate ε for data and model metrics.
    Audit(AuditArgs),
    /// Fit a randomized thresholding predictor under fairness constraints.
    Postprocess(PostprocessArgs),
    /// Apply a fitted parameter file to scored data.
    Apply(ApplyArgs),
    /// Run a synthetic estimator experiment.
    Simulate(SimulateArgs),
    /// Write the Adult-like scored fixture.
    Fixture(FixtureArgs),
}

#[derive(Args, Debug)]
struct Columns {
    /// CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Sensitive attribute columns, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sensitive: Vec<String>,
    /// Binary outcome column.
    #[arg(long)]
    outcome: String,
}

#[derive(Args, Debug)]
struct SmoothingArgs {
    /// Pseudo-count added to the numerator of every rate.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Pseudo-count added to the failures of every rate.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
}

impl SmoothingArgs {
    fn get(&self) -> Result<Smoothing> {
        Smoothing::new(self.alpha, self.beta)
    }
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[command(flatten)]
    columns: Columns,
    /// Score or prediction column in [0, 1]; needed for model metrics.
    #[arg(long)]
    pred: Option<String>,
    /// Metric names, comma separated, or `all`.
    #[arg(long, default_value = "all")]
    metrics: String,
    /// `empirical`, `bootstrap`, `bayesian` or `all`.
    #[arg(long, default_value = "all")]
    method: String,
    #[command(flatten)]
    smoothing: SmoothingArgs,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    prior_alpha: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    prior_beta: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    bootstrap_b: usize,
    /// Posterior draws.
    #[arg(long, default_value_t = 1000)]
    mc_m: usize,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    /// Scores at or above this count as positive predictions.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with code 3 when any point estimate exceeds this ε.
    #[arg(long)]
    fail_above: Option<f64>,
    /// Add a wall-clock timestamp to the report.
    #[arg(long)]
    record_time: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Randomize,
    Deterministic,
    Sequential,
    Overall,
}

#[derive(Args, Debug)]
struct PostprocessArgs {
    #[command(flatten)]
    columns: Columns,
    /// Score column in [0, 1].
    #[arg(long)]
    pred: String,
    #[arg(long, value_enum, default_value_t = Mode::Overall)]
    mode: Mode,
    /// `METRIC:EPS`; repeatable.
    #[arg(long = "constraint")]
    constraints: Vec<FairnessConstraint>,
    /// Cost of a false positive.
    #[arg(long, default_value_t = 1.0)]
    loss_fp: f64,
    /// Cost of a false negative.
    #[arg(long, default_value_t = 1.0)]
    loss_fn: f64,
    #[command(flatten)]
    smoothing: SmoothingArgs,
    /// Fixed cut for `randomize` mode.
    #[arg(long, default_value_t = 0.5)]
    cut: f64,
    /// ROC points kept per subgroup in the threshold searches.
    #[arg(long, default_value_t = 100)]
    max_roc_points: usize,
    /// Random starts of the `overall` search.
    #[arg(long, default_value_t = SearchConfig::default().restarts)]
    restarts: usize,
    /// Coordinate-descent passes per start of the `overall` search.
    #[arg(long, default_value_t = SearchConfig::default().max_passes)]
    max_passes: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Score column; defaults to the one the parameters were fitted on.
    #[arg(long)]
    pred: Option<String>,
    /// Name of the appended column.
    #[arg(long, default_value = "post_prediction")]
    column: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Convergence,
    Mse,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Dataset sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    sizes: Vec<usize>,
    /// Datasets per size (`mse` only).
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value = "impact_ratio")]
    metric: FairnessMetric,
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, default_value_t = 1000)]
    bootstrap_b: usize,
    #[arg(long, default_value_t = 1000)]
    mc_m: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    #[arg(long, default_value_t = 30_000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Gate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Audit(a) => audit(a),
        Command::Postprocess(a) => postprocess(a),
        Command::Apply(a) => apply(a),
        Command::Simulate(a) => simulate(a),
        Command::Fixture(a) => fixture(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Gate(msg)) => {
            eprintln!("{msg}");
            EXIT_GATE
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn seed(flag: Option<u64>) -> std::result::Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn methods(list: &str) -> Result<Vec<Method>> {
    if list.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    list.split(',').map(str::parse).collect()
}

fn metrics(list: &str, has_scores: bool) -> Result<Vec<FairnessMetric>> {
    if list.trim() == "all" {
        return Ok(FairnessMetric::ALL
            .into_iter()
            .filter(|m| has_scores || !m.is_model_metric())
            .collect());
    }
    list.split(',').map(str::parse).collect()
}

struct Loaded {
    table: CsvTable,
    digest: String,
}

fn load(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path)?;
    Ok(Loaded {
        digest: sha256_hex(&bytes),
        table: CsvTable::from_bytes(&bytes)?,
    })
}

fn sensitive(c: &Columns) -> Vec<&str> {
    c.sensitive.iter().map(String::as_str).collect()
}

fn audit(a: AuditArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let metric_list = metrics(&a.metrics, a.pred.is_some())?;
    if a.pred.is_none() && metric_list.iter().any(|m| m.is_model_metric()) {
        return Err(Failure::Usage("model metrics need --pred".into()));
    }
    let method_list = methods(&a.method)?;
    let settings = AuditSettings {
        seed,
        smoothing: a.smoothing.get()?,
        prior: Prior::new(a.prior_alpha, a.prior_beta)?,
        bootstrap_b: a.bootstrap_b,
        mc_m: a.mc_m,
        level: a.level,
        threshold: a.threshold,
    };
    let input = load(&a.columns.data)?;
    let schema = input.table.infer_schema(&sensitive(&a.columns))?;
    let data = input
        .table
        .to_dataset(&schema, &a.columns.outcome, a.pred.as_deref())?;
    let estimates = run_audit(&data, &metric_list, &method_list, &settings)?;
    let manifest = InputManifest {
        path: a.columns.data.display().to_string(),
        sha256: input.digest,
        rows: data.len(),
        sensitive: a.columns.sensitive.clone(),
        outcome: a.columns.outcome.clone(),
        prediction: a.pred.clone(),
    };
    let mut report = AuditReport::new(manifest, &data, settings, estimates)?;
    if a.record_time {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        report.recorded_at = Some(now);
    }
    write_out(a.out.as_deref(), report.to_json()?.as_bytes())?;
    for e in &report.estimates {
        eprintln!(
            "{:<20} {:<10} ε = {:.6}",
            e.metric.name(),
            e.method.name(),
            e.epsilon
        );
    }
    if let Some(limit) = a.fail_above {
        let over: Vec<String> = report
            .estimates
            .iter()
            .filter(|e| e.epsilon > limit)
            .map(|e| format!("{}/{} = {:.6}", e.metric, e.method, e.epsilon))
            .collect();
        if !over.is_empty() {
            return Err(Failure::Gate(format!(
                "ε above {limit}: {}",
                over.join(", ")
            )));
        }
    }
    Ok(())
}

fn postprocess(a: PostprocessArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let smoothing = a.smoothing.get()?;
    let loss = LossSpec::new(a.loss_fp, a.loss_fn)?;
    let input = load(&a.columns.data)?;
    let schema = input.table.infer_schema(&sensitive(&a.columns))?;
    let data = input
        .table
        .to_dataset(&schema, &a.columns.outcome, Some(&a.pred))?;
    let (stats, cut, max_points) = if a.mode == Mode::Randomize {
        (
            ModelStats::from_predictions(&data, smoothing, a.cut)?,
            Some(a.cut),
            None,
        )
    } else {
        let m = Some(a.max_roc_points);
        (ModelStats::from_scores(&data, smoothing, m)?, None, m)
    };
    let c = &a.constraints;
    let fit = match a.mode {
        Mode::Randomize => optimize_randomization(&stats, loss, c)?,
        Mode::Deterministic => optimize_deterministic(&stats, loss, c)?,
        Mode::Sequential => optimize_sequential(&stats, loss, c)?,
        Mode::Overall => {
            let config = SearchConfig {
                restarts: a.restarts,
                max_passes: a.max_passes,
                ..Default::default()
            };
            optimize_overall(&stats, loss, c, &config, &RngStream::new(seed, 0))?
        }
    };
    if fit.fallback {
        eprintln!(
            "warning: no deterministic thresholds meet the constraints; wrote a constant predictor"
        );
    }
    let manifest = FitManifest {
        mode: format!("{:?}", a.mode).to_lowercase(),
        data_sha256: input.digest,
        rows: data.len(),
        outcome_column: a.columns.outcome.clone(),
        smoothing,
        max_roc_points: max_points,
        cut,
        seed,
    };
    let file = ParamsFile::new(&fit, c, loss, &a.pred, manifest);
    write_out(a.out.as_deref(), file.to_json()?.as_bytes())?;
    eprintln!("expected loss {:.6}", fit.loss);
    for (m, e) in &fit.achieved {
        eprintln!("achieved {m} ε = {e:.6}");
    }
    Ok(())
}

fn apply(a: ApplyArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let file = ParamsFile::from_json(&std::fs::read_to_string(&a.params).map_err(Error::from)?)?;
    let params = file.params()?;
    let input = load(&a.data)?;
    let groups = input.table.subgroups(&params.schema)?;
    let scores = input
        .table
        .scores(a.pred.as_deref().unwrap_or(&file.score_column))?;
    let rows: Vec<(usize, f64)> = groups.into_iter().zip(scores).collect();
    let out = apply_to_scores(&params, &rows, &mut RngStream::new(seed, 0))?;
    let values: Vec<String> = out.iter().map(|&b| u8::from(b).to_string()).collect();
    write_out(
        a.out.as_deref(),
        &input.table.with_column(&a.column, &values)?,
    )?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let method_list = methods(&a.method)?;
    let config = ExperimentConfig {
        metric: a.metric,
        replicates: a.bootstrap_b,
        draws: a.mc_m,
        ..Default::default()
    };
    let rates = default_planted_rates();
    let rng = RngStream::new(seed, 0);
    let mut w = csv::Writer::from_writer(Vec::new());
    match a.experiment {
        Experiment::Convergence => {
            for row in convergence_experiment(&rates, &a.sizes, &method_list, &config, &rng)? {
                w.serialize(row).map_err(Error::from)?;
            }
        }
        Experiment::Mse => {
            let study = StudyConfig {
                reps: a.reps,
                estimators: config,
            };
            for row in mse_study(&rates, &a.sizes, &method_list, &study, &rng)?.rows {
                w.serialize(row).map_err(Error::from)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_out(a.out.as_deref(), &bytes)?;
    Ok(())
}

fn fixture(a: FixtureArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let records = adult::adult_like(a.n, &RngStream::new(seed, 0))?;
    let mut bytes = Vec::new();
    adult::write_csv(&records, &mut bytes)?;
    write_out(a.out.as_deref(), &bytes)?;
    Ok(())
}
