//! Randomized thresholding derived predictors.
//!
//! A derived predictor thresholds the score of subgroup `s` at `τ_s` and
//! then keeps a positive with probability `p1_s` or turns a negative into a
//! positive with probability `p0_s`. For fixed thresholds every derived
//! rate is linear in `(p1_s, p0_s)`:
//!
//! ```text
//! T̃PR_s = p1·TPR*_s + p0·(1 − TPR*_s)
//! F̃PR_s = p1·FPR*_s + p0·(1 − FPR*_s)
//! P(Ỹ=1 | s) = F̃PR_s·(1 − μ_{1|s}) + T̃PR_s·μ_{1|s}
//! ```
//!
//! and the expected loss is `Σ_s μ_s [F̃PR_s(1−μ_{1|s})·l01 + F̃NR_s·μ_{1|s}·l10]`.
//!
//! Four fitting strategies are provided: [`optimize_randomization`] (fixed
//! thresholds, linear program over the probabilities),
//! [`optimize_deterministic`] (thresholds only), [`optimize_sequential`]
//! (unconstrained thresholds, then the linear program) and
//! [`optimize_overall`] (search over thresholds of the linear-program
//! optimum).

#[cfg(test)]
mod fixtures;
mod overall;
mod randomize;
mod stats;
mod threshold;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::{pairwise_epsilon, FairnessMetric};
use crate::rng::RngStream;
use crate::schema::AttributeSchema;

pub use overall::{optimize_overall, SearchConfig};
pub use randomize::{optimize_randomization, optimize_randomization_at};
pub use stats::{max_threshold, upper_sentinel, ModelStats, RocPoint, SubgroupStats};
pub use threshold::{optimize_deterministic, optimize_sequential};

/// Costs of the two kinds of error; correct predictions cost nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    /// False positive.
    pub l01: f64,
    /// False negative.
    pub l10: f64,
}

impl LossSpec {
    pub fn new(l01: f64, l10: f64) -> Result<Self> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !(ok(l01) && ok(l10)) || l01 + l10 == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "loss costs must be non-negative and not both zero, got ({l01}, {l10})"
            )));
        }
        Ok(Self { l01, l10 })
    }
}

impl Default for LossSpec {
    fn default() -> Self {
        Self { l01: 1.0, l10: 1.0 }
    }
}

/// Upper bound on the ε of one model metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessConstraint {
    pub metric: FairnessMetric,
    pub eps_max: f64,
}

impl FairnessConstraint {
    pub fn new(metric: FairnessMetric, eps_max: f64) -> Result<Self> {
        if !metric.is_model_metric() {
            return Err(Error::UnsupportedConstraint(metric));
        }
        if !(eps_max >= 0.0 && eps_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constraint bound must be finite and non-negative, got {eps_max}"
            )));
        }
        Ok(Self { metric, eps_max })
    }
}

impl FromStr for FairnessConstraint {
    type Err = Error;

    /// `METRIC:EPS`, e.g. `equalized_odds:2.15`.
    fn from_str(s: &str) -> Result<Self> {
        let (m, e) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("constraint `{s}` is not METRIC:EPS")))?;
        let eps: f64 = e
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad ε in constraint `{s}`")))?;
        FairnessConstraint::new(m.parse()?, eps)
    }
}

impl fmt::Display for FairnessConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.metric, self.eps_max)
    }
}

/// One of the linear rates the constraints act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum RateKind {
    PredictedPositive,
    Tpr,
    Fpr,
}

impl RateKind {
    fn of(metric: FairnessMetric) -> &'static [RateKind] {
        match metric {
            FairnessMetric::StatisticalParity => &[RateKind::PredictedPositive],
            FairnessMetric::TprParity => &[RateKind::Tpr],
            FairnessMetric::FprParity => &[RateKind::Fpr],
            FairnessMetric::EqualizedOdds => &[RateKind::Tpr, RateKind::Fpr],
            _ => &[],
        }
    }

    /// `(a, b)` with `rate = a·p1 + b·p0` at ROC point `pt`.
    pub(crate) fn coefficients(self, pt: &RocPoint, mu1: f64) -> (f64, f64) {
        match self {
            RateKind::Tpr => (pt.tpr, 1.0 - pt.tpr),
            RateKind::Fpr => (pt.fpr, 1.0 - pt.fpr),
            RateKind::PredictedPositive => (
                pt.fpr * (1.0 - mu1) + pt.tpr * mu1,
                (1.0 - pt.fpr) * (1.0 - mu1) + (1.0 - pt.tpr) * mu1,
            ),
        }
    }
}

/// Validated constraints reduced to the tightest bound per rate kind.
pub(crate) fn rate_bounds(constraints: &[FairnessConstraint]) -> Result<Vec<(RateKind, f64)>> {
    let mut out: Vec<(RateKind, f64)> = Vec::new();
    for c in constraints {
        FairnessConstraint::new(c.metric, c.eps_max)?;
        for &k in RateKind::of(c.metric) {
            match out.iter_mut().find(|(kind, _)| *kind == k) {
                Some(entry) => entry.1 = entry.1.min(c.eps_max),
                None => out.push((k, c.eps_max)),
            }
        }
    }
    out.sort_by_key(|e| e.0);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    pub tau: f64,
    pub p1: f64,
    pub p0: f64,
}

impl GroupParams {
    pub const KEEP: GroupParams = GroupParams {
        tau: 0.5,
        p1: 1.0,
        p0: 0.0,
    };
}

/// Parameters of a derived predictor, one entry per subgroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtdpParams {
    pub schema: AttributeSchema,
    pub groups: Vec<GroupParams>,
}

impl RtdpParams {
    pub fn new(schema: AttributeSchema, groups: Vec<GroupParams>) -> Result<Self> {
        let p = Self { schema, groups };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.len() != self.schema.size() {
            return Err(Error::InvalidArgument(format!(
                "{} parameter sets for {} subgroups",
                self.groups.len(),
                self.schema.size()
            )));
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        for (s, g) in self.groups.iter().enumerate() {
            if !((0.0..=max_threshold()).contains(&g.tau) && unit(g.p1) && unit(g.p0)) {
                return Err(Error::InvalidArgument(format!(
                    "parameters of {} out of range: {g:?}",
                    self.schema.render_index(s)
                )));
            }
        }
        Ok(())
    }

    /// No randomization: every positive kept, no negative flipped.
    pub fn is_deterministic(&self) -> bool {
        self.groups.iter().all(|g| g.p1 == 1.0 && g.p0 == 0.0)
    }

    pub fn taus(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.tau).collect()
    }
}

/// Derived `(T̃PR, F̃PR)` of subgroup `s`.
fn derived_rates(params: &RtdpParams, stats: &ModelStats, s: usize) -> Result<(f64, f64)> {
    let g = params.groups[s];
    let pt = stats.roc_point(s, g.tau)?;
    Ok((
        g.p1 * pt.tpr + g.p0 * (1.0 - pt.tpr),
        g.p1 * pt.fpr + g.p0 * (1.0 - pt.fpr),
    ))
}

fn check_cover(params: &RtdpParams, stats: &ModelStats) -> Result<()> {
    if params.schema != stats.schema {
        return Err(Error::SchemaMismatch(
            "parameters and statistics cover different subgroups".into(),
        ));
    }
    Ok(())
}

pub fn expected_loss(params: &RtdpParams, stats: &ModelStats, loss: LossSpec) -> Result<f64> {
    check_cover(params, stats)?;
    let mut total = 0.0;
    for (s, g) in stats.groups.iter().enumerate() {
        let (tpr, fpr) = derived_rates(params, stats, s)?;
        total += g.mu * (fpr * (1.0 - g.mu1) * loss.l01 + (1.0 - tpr) * g.mu1 * loss.l10);
    }
    Ok(total)
}

/// `E[YỸ − cỸ]`. Together with the loss at `l01 = c`, `l10 = 1 − c` it
/// always sums to `(1 − c)·μ₁`.
pub fn utility(params: &RtdpParams, stats: &ModelStats, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidCost(c));
    }
    check_cover(params, stats)?;
    let mut total = 0.0;
    for (s, g) in stats.groups.iter().enumerate() {
        let (tpr, fpr) = derived_rates(params, stats, s)?;
        total += g.mu * ((1.0 - c) * g.mu1 * tpr - c * (1.0 - g.mu1) * fpr);
    }
    Ok(total)
}

/// `P(Ỹ = 1 | S = s)`.
pub fn predicted_positive_rate(params: &RtdpParams, stats: &ModelStats, s: usize) -> Result<f64> {
    check_cover(params, stats)?;
    let (tpr, fpr) = derived_rates(params, stats, s)?;
    let mu1 = stats.groups[s].mu1;
    Ok(fpr * (1.0 - mu1) + tpr * mu1)
}

/// ε of a model metric under the analytic derived rates.
pub fn achieved_epsilon(
    params: &RtdpParams,
    stats: &ModelStats,
    metric: FairnessMetric,
) -> Result<f64> {
    check_cover(params, stats)?;
    let kinds = RateKind::of(metric);
    if kinds.is_empty() {
        return Err(Error::UnsupportedConstraint(metric));
    }
    let mut worst = 0.0f64;
    for &k in kinds {
        let rates = (0..stats.len())
            .map(|s| {
                let g = params.groups[s];
                let pt = stats.roc_point(s, g.tau)?;
                let (a, b) = k.coefficients(&pt, stats.groups[s].mu1);
                Ok((s, a * g.p1 + b * g.p0))
            })
            .collect::<Result<Vec<_>>>()?;
        worst = worst.max(pairwise_epsilon(rates).map_or(0.0, |e| e.0));
    }
    Ok(worst)
}

/// A fitted predictor with its evaluation on the fitting statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub params: RtdpParams,
    pub loss: f64,
    /// Analytic ε per constrained metric, in constraint order.
    pub achieved: Vec<(FairnessMetric, f64)>,
    /// The threshold search found no admissible band and fell back to a
    /// constant predictor.
    pub fallback: bool,
}

impl Fit {
    pub(crate) fn evaluate(
        params: RtdpParams,
        stats: &ModelStats,
        loss: LossSpec,
        constraints: &[FairnessConstraint],
        fallback: bool,
    ) -> Result<Self> {
        let achieved = constraints
            .iter()
            .map(|c| Ok((c.metric, achieved_epsilon(&params, stats, c.metric)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            loss: expected_loss(&params, stats, loss)?,
            params,
            achieved,
            fallback,
        })
    }

    /// Every constraint holds up to `tol` on the analytic rates.
    pub fn satisfies(&self, constraints: &[FairnessConstraint], tol: f64) -> bool {
        constraints
            .iter()
            .zip(&self.achieved)
            .all(|(c, (_, eps))| *eps <= c.eps_max + tol)
    }
}

/// Post-processed predictions: threshold, then keep or flip at random.
///
/// Row `i` consumes exactly one uniform draw, so the output for a row only
/// depends on the seed and the row's position.
pub fn apply_rtdp(
    params: &RtdpParams,
    data: &LabeledDataset,
    rng: &mut RngStream,
) -> Result<Vec<bool>> {
    if params.schema != *data.schema() {
        return Err(Error::SchemaMismatch(
            "parameters and data cover different subgroups".into(),
        ));
    }
    let rows = data
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok((
                r.group,
                r.prediction.ok_or(Error::MissingPrediction { row: i })?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    apply_to_scores(params, &rows, rng)
}

/// [`apply_rtdp`] on bare `(subgroup index, score)` pairs.
pub fn apply_to_scores(
    params: &RtdpParams,
    rows: &[(usize, f64)],
    rng: &mut RngStream,
) -> Result<Vec<bool>> {
    params.validate()?;
    let mut out = Vec::with_capacity(rows.len());
    for &(group, score) in rows {
        let g = params
            .groups
            .get(group)
            .ok_or_else(|| Error::UnknownSubgroup(format!("index {group}")))?;
        let p = if score >= g.tau { g.p1 } else { g.p0 };
        out.push(rng.uniform() < p);
    }
    Ok(out)
}
