use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{FairnessMetric, Smoothing};
use crate::postprocess::{FairnessConstraint, Fit, GroupParams, LossSpec, RtdpParams};
use crate::schema::AttributeSchema;

use super::{check_version, TOOL};

pub const PARAMS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupParams {
    /// Rendered subgroup, checked against the schema on load.
    pub subgroup: String,
    pub tau: f64,
    pub p1: f64,
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AchievedEpsilon {
    pub metric: FairnessMetric,
    pub epsilon: f64,
}

/// How the parameters were fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitManifest {
    pub mode: String,
    pub data_sha256: String,
    pub rows: usize,
    pub outcome_column: String,
    pub smoothing: Smoothing,
    pub max_roc_points: Option<usize>,
    /// Set when the scores were cut once instead of swept.
    pub cut: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub format_version: u32,
    pub tool: String,
    pub schema: AttributeSchema,
    pub score_column: String,
    pub groups: Vec<SubgroupParams>,
    pub constraints: Vec<FairnessConstraint>,
    /// Analytic ε on the fitting statistics, per constrained metric.
    pub achieved: Vec<AchievedEpsilon>,
    pub loss: LossSpec,
    pub expected_loss: f64,
    /// The deterministic search found no admissible band.
    pub fallback: bool,
    pub fit: FitManifest,
}

impl ParamsFile {
    pub fn new(
        fit: &Fit,
        constraints: &[FairnessConstraint],
        loss: LossSpec,
        score_column: &str,
        manifest: FitManifest,
    ) -> Self {
        let schema = fit.params.schema.clone();
        Self {
            format_version: PARAMS_VERSION,
            tool: TOOL.to_string(),
            groups: fit
                .params
                .groups
                .iter()
                .enumerate()
                .map(|(s, g)| SubgroupParams {
                    subgroup: schema.render_index(s),
                    tau: g.tau,
                    p1: g.p1,
                    p0: g.p0,
                })
                .collect(),
            schema,
            score_column: score_column.to_string(),
            constraints: constraints.to_vec(),
            achieved: fit
                .achieved
                .iter()
                .map(|&(metric, epsilon)| AchievedEpsilon { metric, epsilon })
                .collect(),
            loss,
            expected_loss: fit.loss,
            fallback: fit.fallback,
            fit: manifest,
        }
    }

    /// The predictor, after checking every entry against the schema.
    pub fn params(&self) -> Result<RtdpParams> {
        if self.groups.len() != self.schema.size() {
            return Err(Error::SchemaMismatch(format!(
                "{} parameter entries for {} subgroups",
                self.groups.len(),
                self.schema.size()
            )));
        }
        for (s, g) in self.groups.iter().enumerate() {
            let expected = self.schema.render_index(s);
            if g.subgroup != expected {
                return Err(Error::SchemaMismatch(format!(
                    "entry {s} is `{}`, expected `{expected}`",
                    g.subgroup
                )));
            }
        }
        RtdpParams::new(
            self.schema.clone(),
            self.groups
                .iter()
                .map(|g| GroupParams {
                    tau: g.tau,
                    p1: g.p1,
                    p0: g.p0,
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        check_version(text, PARAMS_VERSION)?;
        let file: ParamsFile = serde_json::from_str(text)?;
        file.params()?;
        Ok(file)
    }
}
