use serde::{Deserialize, Serialize};

use crate::counts::{build_counts, DEFAULT_THRESHOLD};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_bayesian, estimate_bootstrap, estimate_empirical, BayesConfig, BootstrapConfig,
    EpsilonEstimate, Interval, Method, Prior, DEFAULT_LEVEL,
};
use crate::metrics::{Comparand, FairnessMetric, Smoothing};
use crate::rng::RngStream;
use crate::schema::AttributeSchema;

use super::{check_version, TOOL};

pub const REPORT_VERSION: u32 = 1;

/// Everything besides the data that an audit result depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub seed: u64,
    pub smoothing: Smoothing,
    pub prior: Prior,
    pub bootstrap_b: usize,
    pub mc_m: usize,
    pub level: f64,
    /// Score cut for model metrics.
    pub threshold: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            smoothing: Smoothing::default(),
            prior: Prior::default(),
            bootstrap_b: 1000,
            mc_m: 1000,
            level: DEFAULT_LEVEL,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl AuditSettings {
    /// Stream for one `(metric, method)` cell; independent of which other
    /// cells the run requested.
    pub fn stream(&self, metric: FairnessMetric, method: Method) -> RngStream {
        let m = FairnessMetric::ALL
            .iter()
            .position(|&x| x == metric)
            .expect("listed metric");
        let j = Method::ALL
            .iter()
            .position(|&x| x == method)
            .expect("listed method");
        RngStream::new(self.seed, 0).child(m as u64).child(j as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub metric: FairnessMetric,
    pub method: Method,
    pub epsilon: f64,
    pub interval: Option<Interval>,
    /// Subgroup with the largest rate (or deviation from the base rate).
    pub worst_high: String,
    /// Its counterpart: a subgroup, or `base rate` for elift.
    pub worst_low: String,
    pub samples_used: usize,
    pub degenerate_replicates: usize,
}

impl EstimateRecord {
    fn new(schema: &AttributeSchema, e: &EpsilonEstimate) -> Self {
        Self {
            metric: e.metric,
            method: e.method,
            epsilon: e.point,
            interval: e.interval,
            worst_high: schema.render_index(e.worst.high),
            worst_low: match e.worst.low {
                Comparand::Subgroup(s) => schema.render_index(s),
                Comparand::Base => "base rate".to_string(),
            },
            samples_used: e.diagnostics.samples_used,
            degenerate_replicates: e.diagnostics.degenerate_replicates,
        }
    }
}

/// Estimates every requested `(metric, method)` cell, metrics outermost.
pub fn run_audit(
    data: &LabeledDataset,
    metrics: &[FairnessMetric],
    methods: &[Method],
    settings: &AuditSettings,
) -> Result<Vec<EstimateRecord>> {
    let needs_scores = metrics.iter().any(|m| m.is_model_metric());
    if needs_scores && !data.has_predictions() {
        return Err(Error::InvalidArgument(
            "model metrics need a prediction column".into(),
        ));
    }
    let threshold = data.has_predictions().then_some(settings.threshold);
    let counts = build_counts(data, threshold)?;
    let mut out = Vec::new();
    for &metric in metrics {
        for &method in methods {
            let stream = settings.stream(metric, method);
            let e = match method {
                Method::Empirical => estimate_empirical(&counts, metric, settings.smoothing)?,
                Method::Bootstrap => estimate_bootstrap(
                    data,
                    metric,
                    &BootstrapConfig {
                        replicates: settings.bootstrap_b,
                        smoothing: settings.smoothing,
                        level: settings.level,
                        threshold,
                    },
                    &stream,
                )?,
                Method::Bayesian => estimate_bayesian(
                    &counts,
                    metric,
                    &BayesConfig {
                        draws: settings.mc_m,
                        prior: settings.prior,
                        level: settings.level,
                    },
                    &stream,
                )?,
            };
            out.push(EstimateRecord::new(data.schema(), &e));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputManifest {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
    pub sensitive: Vec<String>,
    pub outcome: String,
    pub prediction: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub format_version: u32,
    pub tool: String,
    pub input: InputManifest,
    pub schema: AttributeSchema,
    pub subgroups: usize,
    pub empty_subgroups: Vec<String>,
    pub settings: AuditSettings,
    pub estimates: Vec<EstimateRecord>,
    /// Seconds since the Unix epoch; only written on request so that
    /// repeated runs produce identical files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recorded_at: Option<u64>,
}

impl AuditReport {
    pub fn new(
        input: InputManifest,
        data: &LabeledDataset,
        settings: AuditSettings,
        estimates: Vec<EstimateRecord>,
    ) -> Result<Self> {
        let schema = data.schema().clone();
        let counts = build_counts(data, None)?;
        Ok(Self {
            format_version: REPORT_VERSION,
            tool: TOOL.to_string(),
            input,
            subgroups: schema.size(),
            empty_subgroups: counts
                .empty_subgroups()
                .into_iter()
                .map(|s| schema.render_index(s))
                .collect(),
            schema,
            settings,
            estimates,
            recorded_at: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        check_version(text, REPORT_VERSION)?;
        Ok(serde_json::from_str(text)?)
    }

    pub fn estimate(&self, metric: FairnessMetric, method: Method) -> Option<&EstimateRecord> {
        self.estimates
            .iter()
            .find(|e| e.metric == metric && e.method == method)
    }
}
