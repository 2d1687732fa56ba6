//! Robust estimators of ε.
//!
//! - [`estimate_empirical`]: plug-in ε of the smoothed rates.
//! - [`estimate_bootstrap`]: mean and percentile interval over resampled
//!   datasets.
//! - [`estimate_bayesian`]: mean and credible interval of ε under
//!   independent Beta posteriors for every subgroup rate.
//!
//! Intervals use linearly interpolated empirical quantiles.

mod bayesian;
pub mod beta;
mod bootstrap;
mod empirical;
pub mod mse;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{FairnessMetric, WorstPair};

pub use bayesian::{estimate_bayesian, BayesConfig, Prior};
pub use beta::sample_beta;
pub use bootstrap::{estimate_bootstrap, BootstrapConfig};
pub use empirical::estimate_empirical;
pub use mse::{mse_study, MseRow, MseStudy, StudyConfig};

pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Empirical,
    Bootstrap,
    Bayesian,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Empirical, Method::Bootstrap, Method::Bayesian];

    pub fn name(self) -> &'static str {
        match self {
            Method::Empirical => "empirical",
            Method::Bootstrap => "bootstrap",
            Method::Bayesian => "bayesian",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "empirical" => Ok(Method::Empirical),
            "bootstrap" => Ok(Method::Bootstrap),
            "bayesian" | "bayes" => Ok(Method::Bayesian),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub samples_used: usize,
    /// Bootstrap replicates in which some observed subgroup drew no rows.
    pub degenerate_replicates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonEstimate {
    pub metric: FairnessMetric,
    pub method: Method,
    pub point: f64,
    pub interval: Option<Interval>,
    pub worst: WorstPair,
    pub diagnostics: Diagnostics,
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "interval level must lie in (0,1), got {level}"
        )))
    }
}

/// Linearly interpolated quantile of sorted data (the `(n-1)p` rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[hi] == sorted[lo] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Mean and central `level` interval of a sample. The input order does not
/// affect the result.
pub(crate) fn summarize(mut samples: Vec<f64>, level: f64) -> (f64, Interval) {
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    samples.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let interval = Interval {
        lo: quantile_sorted(&samples, tail),
        hi: quantile_sorted(&samples, 1.0 - tail),
        level,
    };
    (mean, interval)
}
