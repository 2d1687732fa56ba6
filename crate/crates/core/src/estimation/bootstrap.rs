use rayon::prelude::*;

use crate::counts::{cell_code, CountsTable, CELLS_PER_GROUP, DEFAULT_THRESHOLD};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::{epsilon_for_counts, FairnessMetric, Smoothing};
use crate::rng::RngStream;

use super::{check_level, summarize, Diagnostics, EpsilonEstimate, Method, DEFAULT_LEVEL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub smoothing: Smoothing,
    pub level: f64,
    /// Score cut for model metrics; `None` means 0.5.
    pub threshold: Option<f64>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            smoothing: Smoothing::default(),
            level: DEFAULT_LEVEL,
            threshold: None,
        }
    }
}

/// Resamples `n` rows with replacement `B` times and estimates ε on each
/// replicate with the smoothed plug-in estimator.
///
/// Replicate `b` draws from `rng.child(b)`, so the estimate does not depend
/// on the number of worker threads.
pub fn estimate_bootstrap(
    data: &LabeledDataset,
    metric: FairnessMetric,
    config: &BootstrapConfig,
    rng: &RngStream,
) -> Result<EpsilonEstimate> {
    let sm = config.smoothing;
    if !(sm.alpha > 0.0 && sm.beta > 0.0) {
        return Err(Error::SmoothingRequired {
            alpha: sm.alpha,
            beta: sm.beta,
        });
    }
    if config.replicates < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 2 replicates".into(),
        ));
    }
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "bootstrap on an empty dataset".into(),
        ));
    }
    check_level(config.level)?;

    let model = metric.is_model_metric();
    let cut = config.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let mut codes = Vec::with_capacity(data.len());
    for (i, r) in data.rows().iter().enumerate() {
        let predicted = if model {
            r.prediction.ok_or(Error::MissingPrediction { row: i })? >= cut
        } else {
            false
        };
        codes.push(cell_code(r.group, r.outcome, predicted) as u32);
    }

    let schema = data.schema();
    let k = schema.size();
    let mut observed = vec![false; k];
    for r in data.rows() {
        observed[r.group] = true;
    }
    let n = codes.len() as u64;

    let plug_in = {
        let mut cells = vec![0u64; k * CELLS_PER_GROUP];
        for &c in &codes {
            cells[c as usize] += 1;
        }
        epsilon_for_counts(
            &CountsTable::from_cells(schema.clone(), &cells, model),
            metric,
            sm,
        )?
    };

    let replicates: Vec<(f64, bool)> = (0..config.replicates)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng.child(b as u64);
            let mut cells = vec![0u64; k * CELLS_PER_GROUP];
            for _ in 0..n {
                cells[codes[stream.below(n) as usize] as usize] += 1;
            }
            let degenerate = (0..k).any(|s| {
                observed[s]
                    && cells[s * CELLS_PER_GROUP..(s + 1) * CELLS_PER_GROUP]
                        .iter()
                        .all(|&c| c == 0)
            });
            let counts = CountsTable::from_cells(schema.clone(), &cells, model);
            epsilon_for_counts(&counts, metric, sm).map(|v| (v.eps, degenerate))
        })
        .collect::<Result<_>>()?;

    let degenerate = replicates.iter().filter(|r| r.1).count();
    let (point, interval) = summarize(replicates.into_iter().map(|r| r.0).collect(), config.level);
    Ok(EpsilonEstimate {
        metric,
        method: Method::Bootstrap,
        point,
        interval: Some(interval),
        worst: plug_in.worst,
        diagnostics: Diagnostics {
            samples_used: config.replicates,
            degenerate_replicates: degenerate,
        },
    })
}
