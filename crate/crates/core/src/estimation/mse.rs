//! Mean squared error of the estimators against a planted ε.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::synth::{generate, ExperimentConfig, PlantedRates};

use super::Method;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyConfig {
    /// Datasets per size.
    pub reps: usize,
    pub estimators: ExperimentConfig,
}

impl StudyConfig {
    /// 200 datasets per size instead of 1000.
    pub fn fast() -> Self {
        Self {
            reps: 200,
            ..Default::default()
        }
    }
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            reps: 1000,
            estimators: ExperimentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub method: Method,
    pub n: usize,
    pub mse: f64,
    /// Mean point estimate.
    pub mean: f64,
    /// Mean interval width; `None` for the empirical estimator.
    pub ci_width: Option<f64>,
}

/// Study results. `points[i][j]` holds the point estimates of size `i`
/// under method `j`, in replicate order; replicate `r` of every method saw
/// the same dataset, so the vectors are paired.
#[derive(Debug, Clone, PartialEq)]
pub struct MseStudy {
    pub truth: f64,
    pub sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub rows: Vec<MseRow>,
    pub points: Vec<Vec<Vec<f64>>>,
}

impl MseStudy {
    pub fn squared_errors(&self, n: usize, method: Method) -> Option<Vec<f64>> {
        let i = self.sizes.iter().position(|&m| m == n)?;
        let j = self.methods.iter().position(|&m| m == method)?;
        Some(
            self.points[i][j]
                .iter()
                .map(|p| (p - self.truth).powi(2))
                .collect(),
        )
    }
}

/// Generates `reps` datasets per size and scores every method against the
/// planted ε of `config.estimators.metric`.
///
/// Replicate `r` of size `i` draws its data from `rng.child(i).child(2r)`
/// and its estimator randomness from `rng.child(i).child(2r + 1)`.
pub fn mse_study(
    rates: &PlantedRates,
    sizes: &[usize],
    methods: &[Method],
    config: &StudyConfig,
    rng: &RngStream,
) -> Result<MseStudy> {
    if config.reps == 0 {
        return Err(Error::InvalidArgument(
            "mse study needs at least 1 rep".into(),
        ));
    }
    let est = &config.estimators;
    let truth = rates.true_epsilon(est.metric)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let size_stream = rng.child(i as u64);
        let per_rep: Vec<Vec<(f64, Option<f64>)>> = (0..config.reps)
            .into_par_iter()
            .map(|r| {
                let data = generate(rates, n, &mut size_stream.child(2 * r as u64))?;
                let stream = size_stream.child(2 * r as u64 + 1);
                methods
                    .iter()
                    .map(|&m| {
                        let e = est.run(m, &data, &stream)?;
                        Ok((e.point, e.interval.map(|iv| iv.width())))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;

        let mut size_points = Vec::with_capacity(methods.len());
        for (j, &method) in methods.iter().enumerate() {
            let pts: Vec<f64> = per_rep.iter().map(|rep| rep[j].0).collect();
            let reps = pts.len() as f64;
            let mse = pts.iter().map(|p| (p - truth).powi(2)).sum::<f64>() / reps;
            let mean = pts.iter().sum::<f64>() / reps;
            let ci_width = per_rep
                .iter()
                .map(|rep| rep[j].1)
                .sum::<Option<f64>>()
                .map(|w| w / reps);
            rows.push(MseRow {
                method,
                n,
                mse,
                mean,
                ci_width,
            });
            size_points.push(pts);
        }
        points.push(size_points);
    }
    Ok(MseStudy {
        truth,
        sizes: sizes.to_vec(),
        methods: methods.to_vec(),
        rows,
        points,
    })
}
