use crate::counts::CountsTable;
use crate::error::Result;
use crate::metrics::{epsilon_for_counts, FairnessMetric, Smoothing};

use super::{Diagnostics, EpsilonEstimate, Method};

/// Plug-in ε of the smoothed rates `(num+α)/(den+α+β)`.
pub fn estimate_empirical(
    counts: &CountsTable,
    metric: FairnessMetric,
    smoothing: Smoothing,
) -> Result<EpsilonEstimate> {
    let v = epsilon_for_counts(counts, metric, smoothing)?;
    Ok(EpsilonEstimate {
        metric,
        method: Method::Empirical,
        point: v.eps,
        interval: None,
        worst: v.worst,
        diagnostics: Diagnostics {
            samples_used: 1,
            degenerate_replicates: 0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::AttributeSchema;

    fn six() -> AttributeSchema {
        AttributeSchema::new([("a", vec!["0", "1"]), ("b", vec!["x", "y", "z"])]).unwrap()
    }

    #[test]
    fn identical_subgroups_give_zero() {
        let c = CountsTable::from_parts(six(), vec![10; 6], vec![4; 6], None).unwrap();
        let e = estimate_empirical(&c, FairnessMetric::ImpactRatio, Smoothing::default()).unwrap();
        assert_eq!(e.point, 0.0);
        assert!(e.interval.is_none());
    }

    #[test]
    fn fixed_table_matches_hand_computation() {
        let n = vec![50, 550, 100, 100, 100, 100];
        let n1 = vec![3, 520, 48, 51, 55, 47];
        let c = CountsTable::from_parts(six(), n.clone(), n1.clone(), None).unwrap();
        let e = estimate_empirical(&c, FairnessMetric::ImpactRatio, Smoothing::default()).unwrap();
        // max rate 520.01/550.02, min rate 3.01/50.02
        let expected = (520.01f64 / 550.02).ln() - (3.01f64 / 50.02).ln();
        assert!((e.point - expected).abs() < 1e-12);
        assert_eq!(e.worst.high, 1);
    }
}
