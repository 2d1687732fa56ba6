//! ε-differential fairness metrics.
//!
//! Each metric compares a conditional rate across intersectional subgroups
//! and is satisfied at level ε when every ratio lies in `[e^{-ε}, e^{ε}]`.
//! The functions here return the smallest such ε for a table of rates.
//!
//! | metric | rate compared | against |
//! |---|---|---|
//! | elift | `P(Y=1 \| s)` | base rate `P(Y=1)` |
//! | impact ratio | `P(Y=1 \| s)` | every other subgroup |
//! | statistical parity | `P(Ŷ=1 \| s)` | every other subgroup |
//! | TPR parity | `P(Ŷ=1 \| Y=1, s)` | every other subgroup |
//! | FPR parity | `P(Ŷ=1 \| Y=0, s)` | every other subgroup |
//! | equalized odds | TPR and FPR parity together | |

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::counts::CountsTable;
use crate::error::{Error, Result};

/// Slack allowed by [`check_threshold`].
pub const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessMetric {
    Elift,
    ImpactRatio,
    StatisticalParity,
    TprParity,
    FprParity,
    EqualizedOdds,
}

impl FairnessMetric {
    pub const ALL: [FairnessMetric; 6] = [
        FairnessMetric::Elift,
        FairnessMetric::ImpactRatio,
        FairnessMetric::StatisticalParity,
        FairnessMetric::TprParity,
        FairnessMetric::FprParity,
        FairnessMetric::EqualizedOdds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FairnessMetric::Elift => "elift",
            FairnessMetric::ImpactRatio => "impact_ratio",
            FairnessMetric::StatisticalParity => "statistical_parity",
            FairnessMetric::TprParity => "tpr_parity",
            FairnessMetric::FprParity => "fpr_parity",
            FairnessMetric::EqualizedOdds => "equalized_odds",
        }
    }

    /// Metrics defined on model outputs rather than on the data.
    pub fn is_model_metric(self) -> bool {
        !matches!(self, FairnessMetric::Elift | FairnessMetric::ImpactRatio)
    }

    /// Single-rate metrics whose conjunction defines `self`.
    pub fn components(self) -> &'static [FairnessMetric] {
        match self {
            FairnessMetric::Elift => &[FairnessMetric::Elift],
            FairnessMetric::ImpactRatio => &[FairnessMetric::ImpactRatio],
            FairnessMetric::StatisticalParity => &[FairnessMetric::StatisticalParity],
            FairnessMetric::TprParity => &[FairnessMetric::TprParity],
            FairnessMetric::FprParity => &[FairnessMetric::FprParity],
            FairnessMetric::EqualizedOdds => {
                &[FairnessMetric::TprParity, FairnessMetric::FprParity]
            }
        }
    }

    /// `(numerator, denominator)` of the rate for subgroup `s`.
    pub fn fraction(self, counts: &CountsTable, s: usize) -> Result<(u64, u64)> {
        match self {
            FairnessMetric::Elift | FairnessMetric::ImpactRatio => Ok((counts.n1(s), counts.n(s))),
            FairnessMetric::EqualizedOdds => Err(Error::CompositeMetric(self)),
            _ => {
                let c = counts.confusion().ok_or(Error::ConfusionRequired(self))?[s];
                Ok(match self {
                    FairnessMetric::StatisticalParity => (c.tp + c.fp, counts.n(s)),
                    FairnessMetric::TprParity => (c.tp, counts.n1(s)),
                    _ => (c.fp, counts.n(s) - counts.n1(s)),
                })
            }
        }
    }
}

impl fmt::Display for FairnessMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FairnessMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        match norm.as_str() {
            "elift" => Ok(FairnessMetric::Elift),
            "impact_ratio" | "slift" => Ok(FairnessMetric::ImpactRatio),
            "statistical_parity" | "demographic_parity" => Ok(FairnessMetric::StatisticalParity),
            "tpr_parity" | "equal_opportunity" => Ok(FairnessMetric::TprParity),
            "fpr_parity" => Ok(FairnessMetric::FprParity),
            "equalized_odds" => Ok(FairnessMetric::EqualizedOdds),
            _ => Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        }
    }
}

/// Beta-Binomial pseudo-counts added to every rate: `(num+α)/(den+α+β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub alpha: f64,
    pub beta: f64,
}

impl Smoothing {
    pub const NONE: Smoothing = Smoothing {
        alpha: 0.0,
        beta: 0.0,
    };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidSmoothing { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn is_none(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0
    }

    #[inline]
    pub fn rate(&self, num: f64, den: f64) -> f64 {
        (num + self.alpha) / (den + self.alpha + self.beta)
    }
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing {
            alpha: 0.01,
            beta: 0.01,
        }
    }
}

/// Per-subgroup rates for one single-rate metric. `None` marks a subgroup
/// left out of the comparison because it has no support and no smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub metric: FairnessMetric,
    pub rates: Vec<Option<f64>>,
    /// Base rate, present for elift only.
    pub base: Option<f64>,
    /// Denominator each rate was formed from.
    pub support: Vec<u64>,
}

/// The second member of a worst-offending pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparand {
    Subgroup(usize),
    Base,
}

/// Subgroups attaining the extreme ratio: `high` has the largest rate
/// (or largest deviation from the base for elift).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstPair {
    pub high: usize,
    pub low: Comparand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonValue {
    pub eps: f64,
    pub worst: WorstPair,
    /// The single-rate metric that produced `eps` (a component for
    /// equalized odds).
    pub source: FairnessMetric,
}

pub fn rates_for_metric(
    counts: &CountsTable,
    metric: FairnessMetric,
    smoothing: Smoothing,
) -> Result<RateTable> {
    if metric == FairnessMetric::EqualizedOdds {
        return Err(Error::CompositeMetric(metric));
    }
    if metric.is_model_metric() && counts.confusion().is_none() {
        return Err(Error::ConfusionRequired(metric));
    }
    let k = counts.len();
    let mut rates = Vec::with_capacity(k);
    let mut support = Vec::with_capacity(k);
    let mut excluded = 0usize;
    for s in 0..k {
        let (num, den) = metric.fraction(counts, s)?;
        support.push(den);
        if den as f64 + smoothing.alpha + smoothing.beta == 0.0 {
            excluded += 1;
            rates.push(None);
        } else {
            rates.push(Some(smoothing.rate(num as f64, den as f64)));
        }
    }
    if excluded == k {
        return Err(Error::DegenerateSubgroup(format!(
            "no subgroup has support for {metric}"
        )));
    }
    if excluded > 0 {
        warn!("{metric}: {excluded} subgroup(s) without support left out of the comparison");
    }
    let base = (metric == FairnessMetric::Elift)
        .then(|| smoothing.rate(counts.total_n1() as f64, counts.total_n() as f64));
    Ok(RateTable {
        metric,
        rates,
        base,
        support,
    })
}

/// `log(max r) - log(min r)` together with the arg-max and arg-min
/// (lowest index on ties). Zero whenever max and min coincide, infinite
/// when only the minimum is zero.
pub fn pairwise_epsilon(
    rates: impl IntoIterator<Item = (usize, f64)>,
) -> Option<(f64, usize, usize)> {
    let mut it = rates.into_iter();
    let (i0, r0) = it.next()?;
    let (mut hi, mut hi_r, mut lo, mut lo_r) = (i0, r0, i0, r0);
    for (i, r) in it {
        if r > hi_r {
            hi = i;
            hi_r = r;
        }
        if r < lo_r {
            lo = i;
            lo_r = r;
        }
    }
    let eps = if hi_r == lo_r {
        0.0
    } else {
        hi_r.ln() - lo_r.ln()
    };
    Some((eps, hi, lo))
}

/// `max_s |log(r_s / base)|` with its arg-max.
pub fn elift_epsilon(
    rates: impl IntoIterator<Item = (usize, f64)>,
    base: f64,
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, r) in rates {
        let d = if r == base {
            0.0
        } else {
            (r.ln() - base.ln()).abs()
        };
        match best {
            Some((b, _)) if d <= b => {}
            _ => best = Some((d, i)),
        }
    }
    best
}

/// Minimal ε for one rate table.
pub fn epsilon(rates: &RateTable) -> EpsilonValue {
    let present = rates
        .rates
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)));
    match (rates.metric, rates.base) {
        (FairnessMetric::Elift, Some(base)) => {
            let (eps, high) = elift_epsilon(present, base).unwrap_or((0.0, 0));
            EpsilonValue {
                eps,
                worst: WorstPair {
                    high,
                    low: Comparand::Base,
                },
                source: rates.metric,
            }
        }
        _ => {
            let (eps, hi, lo) = pairwise_epsilon(present).unwrap_or((0.0, 0, 0));
            EpsilonValue {
                eps,
                worst: WorstPair {
                    high: hi,
                    low: Comparand::Subgroup(lo),
                },
                source: rates.metric,
            }
        }
    }
}

/// Minimal ε for any metric, including equalized odds (the larger of the
/// TPR and FPR parity values; TPR wins ties).
pub fn epsilon_for_counts(
    counts: &CountsTable,
    metric: FairnessMetric,
    smoothing: Smoothing,
) -> Result<EpsilonValue> {
    let mut best: Option<EpsilonValue> = None;
    for &m in metric.components() {
        let v = epsilon(&rates_for_metric(counts, m, smoothing)?);
        if best.is_none_or(|b| v.eps > b.eps) {
            best = Some(v);
        }
    }
    Ok(best.expect("every metric has a component"))
}

pub fn epsilon_equalized_odds(counts: &CountsTable, smoothing: Smoothing) -> Result<f64> {
    Ok(epsilon_for_counts(counts, FairnessMetric::EqualizedOdds, smoothing)?.eps)
}

/// True when `eps` meets the rule, e.g. `-ln(0.8)` for the 80% rule.
pub fn check_threshold(eps: f64, rule: f64) -> bool {
    debug_assert!(rule >= 0.0);
    eps <= rule + THRESHOLD_SLACK
}

/// ε for the four-fifths rule.
pub fn eighty_percent_rule() -> f64 {
    -(0.8f64.ln())
}

/// Multiplicative change in bias going from a model at `eps_from` to one
/// at `eps_to`.
pub fn bias_amplification(eps_from: f64, eps_to: f64) -> f64 {
    (eps_to - eps_from).exp()
}
