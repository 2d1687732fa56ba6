use serde::{Deserialize, Serialize};

use crate::counts::build_counts;
use crate::error::Result;
use crate::estimation::{
    estimate_bayesian, estimate_bootstrap, estimate_empirical, BayesConfig, BootstrapConfig,
    EpsilonEstimate, Method, Prior, DEFAULT_LEVEL,
};
use crate::metrics::{FairnessMetric, Smoothing};
use crate::rng::RngStream;

use super::{generate, PlantedRates};

/// Estimator settings shared by the synthetic experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub metric: FairnessMetric,
    pub smoothing: Smoothing,
    pub prior: Prior,
    pub replicates: usize,
    pub draws: usize,
    pub level: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            metric: FairnessMetric::ImpactRatio,
            smoothing: Smoothing::default(),
            prior: Prior::default(),
            replicates: 1000,
            draws: 1000,
            level: DEFAULT_LEVEL,
        }
    }
}

impl ExperimentConfig {
    /// Runs one estimator on one dataset; `stream` seeds the resampling
    /// or posterior draws.
    pub(crate) fn run(
        &self,
        method: Method,
        data: &crate::data::LabeledDataset,
        stream: &RngStream,
    ) -> Result<EpsilonEstimate> {
        match method {
            Method::Empirical => {
                estimate_empirical(&build_counts(data, None)?, self.metric, self.smoothing)
            }
            Method::Bootstrap => estimate_bootstrap(
                data,
                self.metric,
                &BootstrapConfig {
                    replicates: self.replicates,
                    smoothing: self.smoothing,
                    level: self.level,
                    threshold: None,
                },
                stream,
            ),
            Method::Bayesian => estimate_bayesian(
                &build_counts(data, None)?,
                self.metric,
                &BayesConfig {
                    draws: self.draws,
                    prior: self.prior,
                    level: self.level,
                },
                stream,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub method: Method,
    pub n: usize,
    pub point: f64,
    /// Interval bounds; the empirical estimator has none and reports `point`.
    pub lo: f64,
    pub hi: f64,
}

/// One dataset per size, every requested estimator on each.
///
/// Size `i` generates its data from `rng.child(i).child(0)` and method `m`
/// estimates from `rng.child(i).child(1 + m)`, so adding a method or size
/// leaves the other rows unchanged.
pub fn convergence_experiment(
    rates: &PlantedRates,
    sizes: &[usize],
    methods: &[Method],
    config: &ExperimentConfig,
    rng: &RngStream,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(sizes.len() * methods.len());
    for (i, &n) in sizes.iter().enumerate() {
        let size_stream = rng.child(i as u64);
        let data = generate(rates, n, &mut size_stream.child(0))?;
        for &method in methods {
            let est = config.run(method, &data, &size_stream.child(1 + method as u64))?;
            let (lo, hi) = est
                .interval
                .map_or((est.point, est.point), |iv| (iv.lo, iv.hi));
            rows.push(ConvergenceRow {
                method,
                n,
                point: est.point,
                lo,
                hi,
            });
        }
    }
    Ok(rows)
}
