use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::Smoothing;
use crate::schema::AttributeSchema;

/// One threshold on a subgroup's ROC curve with the smoothed rates of
/// `ŷ ≥ tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub tau: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupStats {
    /// Share of the population in the subgroup.
    pub mu: f64,
    /// Smoothed positive-outcome rate.
    pub mu1: f64,
    /// Strictly decreasing in `tau`; the first point predicts nothing
    /// positive and the last predicts everything positive.
    pub roc: Vec<RocPoint>,
}

impl SubgroupStats {
    pub fn point_at(&self, tau: f64) -> Option<usize> {
        self.roc.iter().position(|p| p.tau == tau)
    }
}

/// Per-subgroup model statistics the optimizers work from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    pub schema: AttributeSchema,
    pub groups: Vec<SubgroupStats>,
    /// Set for binary-input statistics: the only interior threshold.
    pub binary_cut: Option<f64>,
}

/// Threshold above every score in `[0, 1]`.
pub fn upper_sentinel(max_score: f64) -> f64 {
    if max_score < 1.0 {
        1.0
    } else {
        f64::from_bits(1.0f64.to_bits() + 1)
    }
}

/// Largest threshold a parameter file may carry.
pub fn max_threshold() -> f64 {
    upper_sentinel(1.0)
}

struct Tally {
    /// `(score, outcome)` per row.
    rows: Vec<(f64, bool)>,
}

impl ModelStats {
    /// ROC statistics from scores.
    ///
    /// Candidate thresholds are the midpoints between consecutive distinct
    /// scores, plus `0` and a threshold above the largest score. With
    /// `max_points`, interior candidates are thinned evenly so that each
    /// subgroup keeps at most that many points.
    pub fn from_scores(
        data: &LabeledDataset,
        smoothing: Smoothing,
        max_points: Option<usize>,
    ) -> Result<Self> {
        if max_points.is_some_and(|m| m < 2) {
            return Err(Error::InvalidArgument(
                "ROC grids need at least 2 points".into(),
            ));
        }
        let tallies = tally(data, smoothing)?;
        let total = data.len() as f64;
        let groups = tallies
            .into_iter()
            .map(|mut t| {
                t.rows.sort_by(|a, b| b.0.total_cmp(&a.0));
                let (n, n1) = counts(&t.rows);
                let mut roc = Vec::new();
                let max = t.rows.first().map_or(0.0, |r| r.0);
                roc.push(point(upper_sentinel(max), 0, 0, n1, n - n1, smoothing));
                let (mut tp, mut fp) = (0u64, 0u64);
                let mut i = 0;
                while i < t.rows.len() {
                    let score = t.rows[i].0;
                    while i < t.rows.len() && t.rows[i].0 == score {
                        if t.rows[i].1 {
                            tp += 1;
                        } else {
                            fp += 1;
                        }
                        i += 1;
                    }
                    let tau = match t.rows.get(i) {
                        Some(next) => 0.5 * (score + next.0),
                        None => 0.0,
                    };
                    // a zero score makes its midpoint coincide with 0
                    if tau < roc.last().expect("sentinel").tau {
                        roc.push(point(tau, tp, fp, n1, n - n1, smoothing));
                    }
                }
                if roc.last().expect("sentinel").tau > 0.0 {
                    roc.push(point(0.0, n1, n - n1, n1, n - n1, smoothing));
                }
                if let Some(m) = max_points {
                    roc = thin(roc, m);
                }
                SubgroupStats {
                    mu: n as f64 / total,
                    mu1: smoothing.rate(n1 as f64, n as f64),
                    roc,
                }
            })
            .collect();
        Ok(Self {
            schema: data.schema().clone(),
            groups,
            binary_cut: None,
        })
    }

    /// Binary-input statistics: predictions are cut once at `cut`
    /// (`1.0` for 0/1 predictions) and only that threshold is used.
    pub fn from_predictions(data: &LabeledDataset, smoothing: Smoothing, cut: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cut) {
            return Err(Error::InvalidArgument(format!("cut {cut} outside [0, 1]")));
        }
        let total = data.len() as f64;
        let groups = tally(data, smoothing)?
            .into_iter()
            .map(|t| {
                let (n, n1) = counts(&t.rows);
                let tp = t.rows.iter().filter(|r| r.1 && r.0 >= cut).count() as u64;
                let fp = t.rows.iter().filter(|r| !r.1 && r.0 >= cut).count() as u64;
                let mut roc = vec![
                    point(upper_sentinel(1.0), 0, 0, n1, n - n1, smoothing),
                    point(cut, tp, fp, n1, n - n1, smoothing),
                ];
                if cut > 0.0 {
                    roc.push(point(0.0, n1, n - n1, n1, n - n1, smoothing));
                }
                SubgroupStats {
                    mu: n as f64 / total,
                    mu1: smoothing.rate(n1 as f64, n as f64),
                    roc,
                }
            })
            .collect();
        Ok(Self {
            schema: data.schema().clone(),
            groups,
            binary_cut: Some(cut),
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `μ₁ = Σ_s μ_s μ_{1|s}`.
    pub fn base_rate(&self) -> f64 {
        self.groups.iter().map(|g| g.mu * g.mu1).sum()
    }

    pub(crate) fn roc_point(&self, s: usize, tau: f64) -> Result<RocPoint> {
        let g = &self.groups[s];
        g.point_at(tau)
            .map(|i| g.roc[i])
            .ok_or_else(|| Error::MissingRocPoint {
                subgroup: self.schema.render_index(s),
                tau,
            })
    }
}

/// Without smoothing every subgroup needs both outcome classes, or some
/// rate would be `0/0`.
fn tally(data: &LabeledDataset, sm: Smoothing) -> Result<Vec<Tally>> {
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "model statistics need at least one row".into(),
        ));
    }
    let mut out: Vec<Tally> = (0..data.schema().size())
        .map(|_| Tally { rows: Vec::new() })
        .collect();
    for (i, r) in data.rows().iter().enumerate() {
        let p = r.prediction.ok_or(Error::MissingPrediction { row: i })?;
        out[r.group].rows.push((p, r.outcome));
    }
    let one_sided = |t: &Tally| {
        let (n, n1) = counts(&t.rows);
        n1 == 0 || n1 == n
    };
    if sm.alpha + sm.beta == 0.0 && out.iter().any(one_sided) {
        return Err(Error::SmoothingRequired {
            alpha: sm.alpha,
            beta: sm.beta,
        });
    }
    Ok(out)
}

fn counts(rows: &[(f64, bool)]) -> (u64, u64) {
    (
        rows.len() as u64,
        rows.iter().filter(|r| r.1).count() as u64,
    )
}

fn point(tau: f64, tp: u64, fp: u64, n1: u64, n0: u64, sm: Smoothing) -> RocPoint {
    RocPoint {
        tau,
        tpr: sm.rate(tp as f64, n1 as f64),
        fpr: sm.rate(fp as f64, n0 as f64),
    }
}

/// Keeps both ends and `max - 2` evenly spaced interior points.
fn thin(roc: Vec<RocPoint>, max: usize) -> Vec<RocPoint> {
    if roc.len() <= max {
        return roc;
    }
    let last = roc.len() - 1;
    (0..max)
        .map(|j| roc[(j * last + (max - 1) / 2) / (max - 1)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Row;

    fn data(rows: &[(usize, bool, f64)]) -> LabeledDataset {
        let s = AttributeSchema::new([("g", vec!["a", "b"])]).unwrap();
        LabeledDataset::with_rows(
            s,
            rows.iter()
                .map(|&(group, outcome, p)| Row {
                    group,
                    outcome,
                    prediction: Some(p),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn roc_from_scores_exact() {
        let d = data(&[
            (0, true, 0.9),
            (0, false, 0.4),
            (0, true, 0.4),
            (0, false, 0.1),
            (1, true, 1.0),
            (1, false, 0.5),
        ]);
        let st = ModelStats::from_scores(&d, Smoothing::NONE, None).unwrap();
        let taus: Vec<f64> = st.groups[0].roc.iter().map(|p| p.tau).collect();
        assert_eq!(taus, vec![1.0, 0.65, 0.25, 0.0]);
        let rates: Vec<(f64, f64)> = st.groups[0].roc.iter().map(|p| (p.tpr, p.fpr)).collect();
        assert_eq!(rates, vec![(0.0, 0.0), (0.5, 0.0), (1.0, 0.5), (1.0, 1.0)]);
        assert_eq!(st.groups[1].roc[0].tau, max_threshold());
        assert!(st.groups[1].roc[0].tau > 1.0);
        assert_eq!(st.groups[0].mu, 4.0 / 6.0);
        assert_eq!(st.groups[0].mu1, 0.5);
    }

    #[test]
    fn monotone_after_thinning() {
        let rows: Vec<(usize, bool, f64)> = (0..500)
            .map(|i| (i % 2, i % 3 == 0, (i * 37 % 101) as f64 / 100.0))
            .collect();
        let st = ModelStats::from_scores(&data(&rows), Smoothing::default(), Some(10)).unwrap();
        for g in &st.groups {
            assert_eq!(g.roc.len(), 10);
            assert_eq!(g.roc.last().unwrap().tau, 0.0);
            for w in g.roc.windows(2) {
                assert!(w[0].tau > w[1].tau);
                assert!(w[0].tpr <= w[1].tpr && w[0].fpr <= w[1].fpr);
            }
        }
    }

    #[test]
    fn binary_statistics() {
        let d = data(&[
            (0, true, 1.0),
            (0, false, 0.0),
            (0, false, 1.0),
            (1, true, 0.0),
        ]);
        assert!(ModelStats::from_predictions(&d, Smoothing::NONE, 1.0).is_err());
        let d = data(&[
            (0, true, 1.0),
            (0, false, 0.0),
            (0, false, 1.0),
            (1, true, 0.0),
            (1, false, 0.0),
        ]);
        let st = ModelStats::from_predictions(&d, Smoothing::NONE, 1.0).unwrap();
        let p = st.roc_point(0, 1.0).unwrap();
        assert_eq!((p.tpr, p.fpr), (1.0, 0.5));
        assert!(st.roc_point(0, 0.5).is_err());
    }
}
