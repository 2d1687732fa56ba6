//! Synthetic populations with known subgroup rates.
//!
//! The default population has one binary and one ternary sensitive
//! attribute. Subgroup `s₁` holds 5% of the mass with a 5% positive rate
//! and `s₂` holds 55% with a 95% positive rate, so the true impact-ratio ε
//! is `ln(0.95/0.05)`.

pub mod adult;
mod experiments;

use crate::data::{LabeledDataset, Row};
use crate::error::{Error, Result};
use crate::estimation::beta::sample_beta;
use crate::metrics::{elift_epsilon, pairwise_epsilon, FairnessMetric};
use crate::rng::RngStream;
use crate::schema::AttributeSchema;

pub use experiments::{convergence_experiment, ConvergenceRow, ExperimentConfig};

/// Score resolution of [`generate_scored`].
pub const SCORE_RESOLUTION: f64 = 0.01;

/// Planted `μ_s` (subgroup mass) and `μ_{1|s}` (positive rate) per subgroup.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedRates {
    schema: AttributeSchema,
    mu: Vec<f64>,
    mu1: Vec<f64>,
}

impl PlantedRates {
    pub fn new(schema: AttributeSchema, mu: Vec<f64>, mu1: Vec<f64>) -> Result<Self> {
        let k = schema.size();
        if mu.len() != k || mu1.len() != k {
            return Err(Error::InvalidArgument(format!(
                "planted rates need {k} entries per vector"
            )));
        }
        if mu.iter().chain(&mu1).any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::InvalidArgument(
                "planted probabilities must lie in (0,1)".into(),
            ));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "subgroup masses sum to {total}, not 1"
            )));
        }
        Ok(Self { schema, mu, mu1 })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }

    /// `μ₁ = Σ_s μ_s μ_{1|s}`.
    pub fn base_rate(&self) -> f64 {
        self.mu.iter().zip(&self.mu1).map(|(a, b)| a * b).sum()
    }

    /// Exact ε of a data metric under the planted rates.
    pub fn true_epsilon(&self, metric: FairnessMetric) -> Result<f64> {
        let indexed = self.mu1.iter().copied().enumerate();
        match metric {
            FairnessMetric::ImpactRatio => Ok(pairwise_epsilon(indexed).map_or(0.0, |e| e.0)),
            FairnessMetric::Elift => {
                Ok(elift_epsilon(indexed, self.base_rate()).map_or(0.0, |e| e.0))
            }
            m => Err(Error::InvalidArgument(format!(
                "{m} depends on a model; planted rates only define data metrics"
            ))),
        }
    }
}

/// The two-attribute schema of the default population.
pub fn default_schema() -> AttributeSchema {
    AttributeSchema::new([("g", vec!["g0", "g1"]), ("r", vec!["r0", "r1", "r2"])])
        .expect("static schema is valid")
}

pub fn default_planted_rates() -> PlantedRates {
    PlantedRates::new(
        default_schema(),
        vec![0.05, 0.55, 0.1, 0.1, 0.1, 0.1],
        vec![0.05, 0.95, 0.5, 0.5, 0.5, 0.5],
    )
    .expect("static rates are valid")
}

fn draw_group(cumulative: &[f64], rng: &mut RngStream) -> usize {
    let u = rng.uniform();
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn cumulative(mu: &[f64]) -> Vec<f64> {
    mu.iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// `n` independent rows: `s ~ Categorical(μ)`, `y ~ Bernoulli(μ_{1|s})`.
pub fn generate(rates: &PlantedRates, n: usize, rng: &mut RngStream) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let cum = cumulative(&rates.mu);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let group = draw_group(&cum, rng);
        let outcome = rng.bernoulli(rates.mu1[group]);
        rows.push(Row {
            group,
            outcome,
            prediction: None,
        });
    }
    LabeledDataset::with_rows(rates.schema.clone(), rows)
}

/// Per-subgroup score separation: subgroup `s` of `k` gets
/// `quality · (1 − 0.6·s/(k−1))`, so later subgroups are served worse.
pub fn separation(quality: f64, s: usize, k: usize) -> f64 {
    let h = if k > 1 {
        1.0 - 0.6 * s as f64 / (k - 1) as f64
    } else {
        1.0
    };
    quality * h
}

/// Like [`generate`] but with a classifier score on every row.
///
/// Positives score `Beta(2 + q_s, 2)` and negatives `Beta(2, 2 + q_s)` with
/// `q_s` from [`separation`]; `quality = 0` gives uninformative scores.
/// Scores are rounded to [`SCORE_RESOLUTION`].
pub fn generate_scored(
    rates: &PlantedRates,
    n: usize,
    quality: f64,
    rng: &mut RngStream,
) -> Result<LabeledDataset> {
    if !(quality >= 0.0 && quality.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "quality must be finite and non-negative, got {quality}"
        )));
    }
    let k = rates.schema.size();
    let mut data = generate(rates, n, rng)?;
    let rows = data
        .rows()
        .iter()
        .map(|r| {
            let q = separation(quality, r.group, k);
            let raw = if r.outcome {
                sample_beta(rng, 2.0 + q, 2.0)
            } else {
                sample_beta(rng, 2.0, 2.0 + q)
            };
            let score = (raw / SCORE_RESOLUTION).round() * SCORE_RESOLUTION;
            Row {
                prediction: Some(score.clamp(0.0, 1.0)),
                ..*r
            }
        })
        .collect();
    data = LabeledDataset::with_rows(rates.schema.clone(), rows)?;
    Ok(data)
}
