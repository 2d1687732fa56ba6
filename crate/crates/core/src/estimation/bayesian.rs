use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::CountsTable;
use crate::error::{Error, Result};
use crate::metrics::{
    elift_epsilon, epsilon_for_counts, pairwise_epsilon, FairnessMetric, Smoothing,
};
use crate::rng::RngStream;

use super::beta::sample_beta;
use super::{check_level, summarize, Diagnostics, EpsilonEstimate, Method, DEFAULT_LEVEL};

/// Beta prior on every subgroup rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub alpha: f64,
    pub beta: f64,
}

impl Prior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidPrior { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    /// Posterior parameters after `num` successes in `den` trials.
    pub fn posterior(&self, num: u64, den: u64) -> (f64, f64) {
        (self.alpha + num as f64, self.beta + (den - num) as f64)
    }
}

impl Default for Prior {
    fn default() -> Self {
        Prior {
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesConfig {
    pub draws: usize,
    pub prior: Prior,
    pub level: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            draws: 1000,
            prior: Prior::default(),
            level: DEFAULT_LEVEL,
        }
    }
}

struct Posterior {
    params: Vec<(f64, f64)>,
    base: Option<(f64, f64)>,
}

/// Posterior mean and credible interval of ε.
///
/// Every rate `μ_s` gets an independent `Beta(α + num, β + den − num)`
/// posterior; draw `j` (from `rng.child(j)`) samples all of them and
/// evaluates ε on the sample. The point estimate is the mean of those ε
/// values, not ε of the posterior means.
pub fn estimate_bayesian(
    counts: &CountsTable,
    metric: FairnessMetric,
    config: &BayesConfig,
    rng: &RngStream,
) -> Result<EpsilonEstimate> {
    let prior = Prior::new(config.prior.alpha, config.prior.beta)?;
    if config.draws < 2 {
        return Err(Error::InvalidArgument(
            "Bayesian estimation needs at least 2 draws".into(),
        ));
    }
    check_level(config.level)?;

    let mut posteriors = Vec::new();
    for &m in metric.components() {
        let params = (0..counts.len())
            .map(|s| {
                m.fraction(counts, s)
                    .map(|(num, den)| prior.posterior(num, den))
            })
            .collect::<Result<Vec<_>>>()?;
        let base = (m == FairnessMetric::Elift)
            .then(|| prior.posterior(counts.total_n1(), counts.total_n()));
        posteriors.push(Posterior { params, base });
    }

    let samples: Vec<f64> = (0..config.draws)
        .into_par_iter()
        .map(|j| {
            let mut stream = rng.child(j as u64);
            let mut rates = Vec::new();
            posteriors
                .iter()
                .map(|post| {
                    rates.clear();
                    rates.extend(
                        post.params
                            .iter()
                            .map(|&(a, b)| sample_beta(&mut stream, a, b)),
                    );
                    let indexed = rates.iter().copied().enumerate();
                    match post.base {
                        Some((a, b)) => {
                            let base = sample_beta(&mut stream, a, b);
                            elift_epsilon(indexed, base).map_or(0.0, |e| e.0)
                        }
                        None => pairwise_epsilon(indexed).map_or(0.0, |e| e.0),
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect();

    // worst pair of the posterior means (α+num)/(α+β+den)
    let means = Smoothing {
        alpha: prior.alpha,
        beta: prior.beta,
    };
    let worst = epsilon_for_counts(counts, metric, means)?.worst;
    let (point, interval) = summarize(samples, config.level);
    Ok(EpsilonEstimate {
        metric,
        method: Method::Bayesian,
        point,
        interval: Some(interval),
        worst,
        diagnostics: Diagnostics {
            samples_used: config.draws,
            degenerate_replicates: 0,
        },
    })
}
