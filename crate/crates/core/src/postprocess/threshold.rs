use crate::error::Result;

use super::randomize::{params_from, solve_at, Form};
use super::{rate_bounds, FairnessConstraint, Fit, LossSpec, ModelStats, RateKind};

/// Range-minimum table over one subgroup's per-point losses; queries return
/// the lowest index among equal minima.
struct MinTable {
    levels: Vec<Vec<usize>>,
}

impl MinTable {
    fn new(values: &[f64]) -> Self {
        let mut levels = vec![(0..values.len()).collect::<Vec<_>>()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().expect("base level");
            let next = (0..=values.len() - 2 * width)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + width]);
                    if values[b] < values[a] {
                        b
                    } else {
                        a
                    }
                })
                .collect();
            levels.push(next);
            width *= 2;
        }
        Self { levels }
    }

    /// Arg-min over the inclusive range `lo..=hi`.
    fn query(&self, values: &[f64], lo: usize, hi: usize) -> usize {
        let len = hi - lo + 1;
        let j = usize::BITS - 1 - len.leading_zeros();
        let level = &self.levels[j as usize];
        let (a, b) = (level[lo], level[hi + 1 - (1 << j)]);
        if values[b] < values[a] {
            b
        } else {
            a
        }
    }
}

/// Expected loss of each ROC point of each subgroup at `p1 = 1, p0 = 0`.
pub(crate) fn point_losses(stats: &ModelStats, loss: LossSpec) -> Vec<Vec<f64>> {
    stats
        .groups
        .iter()
        .map(|g| {
            g.roc
                .iter()
                .map(|pt| {
                    g.mu * (pt.fpr * (1.0 - g.mu1) * loss.l01 + (1.0 - pt.tpr) * g.mu1 * loss.l10)
                })
                .collect()
        })
        .collect()
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

struct Band {
    eps_scale: f64,
    /// `rates[s][i]`, nondecreasing in `i`.
    rates: Vec<Vec<f64>>,
    /// Candidate lower edges, ascending.
    anchors: Vec<f64>,
}

struct Sweep<'a> {
    bands: Vec<Band>,
    losses: &'a [Vec<f64>],
    tables: Vec<MinTable>,
    best: Option<(f64, Vec<usize>)>,
}

impl Sweep<'_> {
    /// Narrows `ranges` by band `level` at every anchor, recursing into the
    /// next band; at the bottom picks each subgroup's cheapest point.
    fn run(&mut self, level: usize, ranges: &[(usize, usize)]) {
        if level == self.bands.len() {
            let mut total = 0.0;
            let mut idx = Vec::with_capacity(ranges.len());
            for (s, &(lo, hi)) in ranges.iter().enumerate() {
                let i = self.tables[s].query(&self.losses[s], lo, hi);
                total += self.losses[s][i];
                idx.push(i);
            }
            if self.best.as_ref().is_none_or(|b| total < b.0) {
                self.best = Some((total, idx));
            }
            return;
        }
        let mut narrowed = vec![(0, 0); ranges.len()];
        for a in 0..self.bands[level].anchors.len() {
            let band = &self.bands[level];
            let lower = band.anchors[a];
            let upper = lower * band.eps_scale;
            let mut ok = true;
            for (s, &(lo, hi)) in ranges.iter().enumerate() {
                let r = &band.rates[s][lo..=hi];
                let first = lo + r.partition_point(|&v| v < lower);
                let end = lo + r.partition_point(|&v| v <= upper);
                if first >= end {
                    ok = false;
                    break;
                }
                narrowed[s] = (first, end - 1);
            }
            if ok {
                let next = narrowed.clone();
                self.run(level + 1, &next);
            }
        }
    }
}

/// Thresholds only (`p1 = 1`, `p0 = 0`).
///
/// A set of subgroup rates has ratio at most `e^ε` exactly when all of them
/// fit in a band `[L, e^ε·L]`, and `L` can be taken to be the smallest of
/// them. The sweep tries every attained rate as the lower edge of each
/// constrained rate's band and, inside the bands, picks each subgroup's
/// cheapest ROC point; the search over deterministic predictors is exact.
/// When no band admits every subgroup the cheaper of the all-negative and
/// all-positive predictors is returned with `fallback` set.
pub fn optimize_deterministic(
    stats: &ModelStats,
    loss: LossSpec,
    constraints: &[FairnessConstraint],
) -> Result<Fit> {
    let bounds = rate_bounds(constraints)?;
    let losses = point_losses(stats, loss);
    let ones = vec![(1.0, 0.0); stats.len()];
    if bounds.is_empty() {
        let idx: Vec<usize> = losses.iter().map(|l| argmin(l)).collect();
        return Fit::evaluate(
            params_from(stats, &idx, &ones)?,
            stats,
            loss,
            constraints,
            false,
        );
    }

    let bands = bounds
        .iter()
        .map(|&(kind, eps)| band_for(stats, kind, eps))
        .collect();
    let mut sweep = Sweep {
        bands,
        losses: &losses,
        tables: losses.iter().map(|l| MinTable::new(l)).collect(),
        best: None,
    };
    let full: Vec<(usize, usize)> = stats.groups.iter().map(|g| (0, g.roc.len() - 1)).collect();
    sweep.run(0, &full);

    match sweep.best {
        Some((_, idx)) => Fit::evaluate(
            params_from(stats, &idx, &ones)?,
            stats,
            loss,
            constraints,
            false,
        ),
        None => {
            let none: Vec<usize> = vec![0; stats.len()];
            let all: Vec<usize> = stats.groups.iter().map(|g| g.roc.len() - 1).collect();
            let cost = |idx: &[usize]| {
                idx.iter()
                    .enumerate()
                    .map(|(s, &i)| losses[s][i])
                    .sum::<f64>()
            };
            let idx = if cost(&all) < cost(&none) { all } else { none };
            log::warn!("no threshold band satisfies the constraints; using a constant predictor");
            Fit::evaluate(
                params_from(stats, &idx, &ones)?,
                stats,
                loss,
                constraints,
                true,
            )
        }
    }
}

fn band_for(stats: &ModelStats, kind: RateKind, eps: f64) -> Band {
    let rates: Vec<Vec<f64>> = stats
        .groups
        .iter()
        .map(|g| {
            g.roc
                .iter()
                .map(|pt| kind.coefficients(pt, g.mu1).0)
                .collect()
        })
        .collect();
    let scale = eps.exp();
    // a lower edge must not exceed any subgroup's largest rate, and its
    // band must reach every subgroup's smallest rate
    let cap = rates
        .iter()
        .map(|r| *r.last().expect("non-empty ROC"))
        .fold(f64::INFINITY, f64::min);
    let floor = rates.iter().map(|r| r[0]).fold(0.0, f64::max) / scale;
    let mut anchors: Vec<f64> = rates
        .iter()
        .flatten()
        .copied()
        .filter(|&v| v <= cap && v >= floor * (1.0 - 1e-12))
        .collect();
    anchors.sort_by(f64::total_cmp);
    anchors.dedup();
    Band {
        eps_scale: scale,
        rates,
        anchors,
    }
}

/// Unconstrained loss-minimizing thresholds, then the probabilities that
/// meet the constraints at those thresholds.
pub fn optimize_sequential(
    stats: &ModelStats,
    loss: LossSpec,
    constraints: &[FairnessConstraint],
) -> Result<Fit> {
    let bounds = rate_bounds(constraints)?;
    let idx: Vec<usize> = point_losses(stats, loss)
        .iter()
        .map(|l| argmin(l))
        .collect();
    let (_, ps) = solve_at(stats, &idx, loss, &bounds, Form::Pairwise)?;
    Fit::evaluate(
        params_from(stats, &idx, &ps)?,
        stats,
        loss,
        constraints,
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::FairnessMetric;
    use crate::postprocess::fixtures::random_stats;
    use crate::postprocess::{achieved_epsilon, RocPoint};
    use crate::rng::RngStream;
    use crate::schema::AttributeSchema;

    #[test]
    fn min_table_matches_scan() {
        let mut rng = RngStream::new(3, 0);
        let v: Vec<f64> = (0..37).map(|_| (rng.uniform() * 5.0).floor()).collect();
        let t = MinTable::new(&v);
        for lo in 0..v.len() {
            for hi in lo..v.len() {
                assert_eq!(t.query(&v, lo, hi), lo + argmin(&v[lo..=hi]));
            }
        }
    }

    #[test]
    fn single_group_unconstrained_is_scan_minimum() {
        let st = random_stats(1, 30, &mut RngStream::new(5, 0));
        let fit = optimize_deterministic(&st, LossSpec::default(), &[]).unwrap();
        let losses = &point_losses(&st, LossSpec::default())[0];
        let best = losses.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(fit.loss, best);
        assert!(fit.params.is_deterministic());
    }

    #[test]
    fn identical_curves_get_equal_thresholds() {
        let mut st = random_stats(1, 25, &mut RngStream::new(6, 0));
        st.schema = AttributeSchema::new([("g", vec!["a", "b"])]).unwrap();
        st.groups[0].mu = 0.5;
        st.groups.push(st.groups[0].clone());
        let c = [FairnessConstraint::new(FairnessMetric::EqualizedOdds, 0.0).unwrap()];
        let fit = optimize_deterministic(&st, LossSpec::default(), &c).unwrap();
        assert_eq!(fit.params.groups[0].tau, fit.params.groups[1].tau);
        assert_eq!(fit.achieved[0].1, 0.0);
        let free = optimize_deterministic(&st, LossSpec::default(), &[]).unwrap();
        assert_eq!(fit.loss, free.loss);
    }

    #[test]
    fn matches_exhaustive_product_grid() {
        for seed in 0..5 {
            let st = random_stats(3, 20, &mut RngStream::new(100 + seed, 0));
            let c = [FairnessConstraint::new(FairnessMetric::TprParity, 0.2).unwrap()];
            let fit = optimize_deterministic(&st, LossSpec::default(), &c).unwrap();
            let losses = point_losses(&st, LossSpec::default());
            let mut best = f64::INFINITY;
            let n = |s: usize| st.groups[s].roc.len();
            for a in 0..n(0) {
                for b in 0..n(1) {
                    for d in 0..n(2) {
                        let t = [
                            st.groups[0].roc[a].tpr,
                            st.groups[1].roc[b].tpr,
                            st.groups[2].roc[d].tpr,
                        ];
                        let hi = t.iter().copied().fold(0.0, f64::max);
                        let lo = t.iter().copied().fold(1.0, f64::min);
                        if hi.ln() - lo.ln() <= 0.2 + 1e-12 {
                            best = best.min(losses[0][a] + losses[1][b] + losses[2][d]);
                        }
                    }
                }
            }
            assert!(!fit.fallback);
            assert!(
                (fit.loss - best).abs() < 1e-12,
                "seed {seed}: {} vs {best}",
                fit.loss
            );
            let eps = achieved_epsilon(&fit.params, &st, FairnessMetric::TprParity).unwrap();
            assert!(eps <= 0.2 + 1e-9);
        }
    }

    #[test]
    fn falls_back_to_constant_predictor() {
        // disjoint TPR ranges cannot share a zero-width band
        let mut st = random_stats(2, 3, &mut RngStream::new(9, 0));
        st.groups[0].roc = vec![
            RocPoint {
                tau: 1.0,
                tpr: 0.1,
                fpr: 0.1,
            },
            RocPoint {
                tau: 0.0,
                tpr: 0.2,
                fpr: 0.9,
            },
        ];
        st.groups[1].roc = vec![
            RocPoint {
                tau: 1.0,
                tpr: 0.5,
                fpr: 0.1,
            },
            RocPoint {
                tau: 0.0,
                tpr: 0.6,
                fpr: 0.9,
            },
        ];
        let c = [FairnessConstraint::new(FairnessMetric::TprParity, 0.1).unwrap()];
        let fit = optimize_deterministic(&st, LossSpec::default(), &c).unwrap();
        assert!(fit.fallback);
        let taus = fit.params.taus();
        assert!(taus == vec![1.0, 1.0] || taus == vec![0.0, 0.0]);
    }

    #[test]
    fn sequential_without_constraints_keeps_thresholds() {
        let mut rng = RngStream::new(12, 0);
        let st = random_stats(4, 30, &mut rng);
        let det = optimize_deterministic(&st, LossSpec::default(), &[]).unwrap();
        let seq = optimize_sequential(&st, LossSpec::default(), &[]).unwrap();
        assert_eq!(det.params.taus(), seq.params.taus());
        assert!((det.loss - seq.loss).abs() < 1e-12);
    }

    #[test]
    fn sequential_meets_constraints() {
        let st = random_stats(6, 40, &mut RngStream::new(13, 0));
        let c = [FairnessConstraint::new(FairnessMetric::EqualizedOdds, 0.3).unwrap()];
        let seq = optimize_sequential(&st, LossSpec::default(), &c).unwrap();
        let det = optimize_deterministic(&st, LossSpec::default(), &c).unwrap();
        assert!(seq.satisfies(&c, 1e-6));
        assert!(det.satisfies(&c, 1e-6) || det.fallback);
    }
}
