use crate::rng::RngStream;
use crate::schema::AttributeSchema;

use super::{ModelStats, RocPoint, SubgroupStats};

/// Random concave-ish ROC curves with `points` thresholds each.
pub(crate) fn random_stats(k: usize, points: usize, rng: &mut RngStream) -> ModelStats {
    let labels: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
    let mut mass: Vec<f64> = (0..k).map(|_| 0.2 + rng.uniform()).collect();
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    let groups = mass
        .into_iter()
        .map(|mu| {
            let power = 1.5 + 4.0 * rng.uniform();
            let mut xs: Vec<f64> = (0..points - 2)
                .map(|_| 0.01 + 0.98 * rng.uniform())
                .collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let mut roc = vec![RocPoint {
                tau: 1.0,
                tpr: 0.005,
                fpr: 0.005,
            }];
            for (j, &x) in xs.iter().enumerate() {
                roc.push(RocPoint {
                    tau: 1.0 - (j + 1) as f64 / (xs.len() + 1) as f64,
                    tpr: 1.0 - (1.0 - x).powf(power),
                    fpr: x,
                });
            }
            roc.push(RocPoint {
                tau: 0.0,
                tpr: 0.995,
                fpr: 0.995,
            });
            SubgroupStats {
                mu,
                mu1: 0.15 + 0.7 * rng.uniform(),
                roc,
            }
        })
        .collect();
    ModelStats {
        schema: AttributeSchema::new([("g", labels)]).unwrap(),
        groups,
        binary_cut: None,
    }
}
