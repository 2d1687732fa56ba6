//! Intersectional fairness auditing and mitigation.
//!
//! The crate measures ε-differential fairness of datasets and binary
//! classifiers over every intersection of a set of discrete sensitive
//! attributes, estimates ε robustly (smoothed plug-in, bootstrap and
//! Beta-Binomial posterior sampling), and fits randomized thresholding
//! derived predictors that bring a classifier within a requested ε.
//!
//! Module map:
//!
//! - [`schema`], [`data`], [`counts`]: attribute domains, subgroup keys,
//!   labelled rows and per-subgroup tallies.
//! - [`metrics`]: the six fairness metrics and the minimal ε for each.
//! - [`estimation`]: empirical, bootstrap and Bayesian estimators.
//! - [`lp`]: a dense two-phase simplex solver.
//! - [`postprocess`]: derived-predictor fitting and application.
//! - [`synth`]: planted-rate generators and experiment drivers.
//! - [`io`] and [`cli`]: CSV ingestion, reports, parameter files, commands.

pub mod cli;
pub mod counts;
pub mod data;
pub mod error;
pub mod estimation;
pub mod io;
pub mod lp;
pub mod metrics;
pub mod postprocess;
pub mod rng;
pub mod schema;
pub mod standin;
pub mod synth;

pub use counts::{build_counts, marginalize, Confusion, CountsTable};
pub use data::{LabeledDataset, Row};
pub use error::{Error, Result};
pub use metrics::{FairnessMetric, RateTable};
pub use rng::RngStream;
pub use schema::{enumerate_subgroups, AttributeSchema, SubgroupKey};
