use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::randomize::{params_from, solve_at, Form};
use super::threshold::{optimize_deterministic, optimize_sequential};
use super::{rate_bounds, FairnessConstraint, Fit, LossSpec, ModelStats, RateKind};

/// Budget of the joint threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Grids with at most this many threshold combinations are searched
    /// exhaustively.
    pub exhaustive_limit: u64,
    /// Random starting points on top of the sequential and deterministic
    /// thresholds.
    pub restarts: usize,
    /// Coordinate-descent passes per start; a pass scans every subgroup once.
    pub max_passes: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            exhaustive_limit: 4096,
            restarts: 5,
            max_passes: 10,
        }
    }
}

/// Linear-program optimum as a function of the ROC indices, memoized.
struct Objective<'a> {
    stats: &'a ModelStats,
    loss: LossSpec,
    bounds: &'a [(RateKind, f64)],
    cache: HashMap<Vec<usize>, f64>,
}

impl Objective<'_> {
    fn value(&mut self, idx: &[usize]) -> Result<f64> {
        if let Some(&v) = self.cache.get(idx) {
            return Ok(v);
        }
        let v = match solve_at(self.stats, idx, self.loss, self.bounds, Form::Band) {
            Ok((v, _)) => v,
            Err(Error::InfeasibleConstraint(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        self.cache.insert(idx.to_vec(), v);
        Ok(v)
    }
}

/// Lower loss wins; equal losses go to the lexicographically smaller
/// threshold vector, i.e. the larger index vector.
fn better(a: (f64, &[usize]), b: (f64, &[usize])) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.1 > b.1,
    }
}

fn descend(obj: &mut Objective, start: Vec<usize>, passes: usize) -> Result<(f64, Vec<usize>)> {
    let sizes: Vec<usize> = obj.stats.groups.iter().map(|g| g.roc.len()).collect();
    let mut cur = start;
    let mut cur_f = obj.value(&cur)?;
    for _ in 0..passes {
        let mut moved = false;
        for s in 0..sizes.len() {
            let mut cand = cur.clone();
            for i in 0..sizes[s] {
                cand[s] = i;
                let f = obj.value(&cand)?;
                if better((f, &cand), (cur_f, &cur)) {
                    cur = cand.clone();
                    cur_f = f;
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    Ok((cur_f, cur))
}

fn indices_of(stats: &ModelStats, fit: &Fit) -> Vec<usize> {
    fit.params
        .groups
        .iter()
        .zip(&stats.groups)
        .map(|(p, g)| {
            g.point_at(p.tau)
                .expect("fit thresholds come from the grid")
        })
        .collect()
}

/// Thresholds and probabilities chosen together.
///
/// For fixed thresholds the best probabilities solve a linear program, so
/// the search runs over threshold vectors with the program's optimum as the
/// objective. Small grids are enumerated; larger ones use coordinate
/// descent from the sequential and deterministic solutions plus
/// `config.restarts` random points, start `r` drawing from `rng.child(r)`.
/// The result never loses to the sequential or to a constraint-satisfying
/// deterministic fit, and does not depend on the thread count.
pub fn optimize_overall(
    stats: &ModelStats,
    loss: LossSpec,
    constraints: &[FairnessConstraint],
    config: &SearchConfig,
    rng: &RngStream,
) -> Result<Fit> {
    let bounds = rate_bounds(constraints)?;
    let seq = optimize_sequential(stats, loss, constraints)?;
    let det = optimize_deterministic(stats, loss, constraints)?;
    let sizes: Vec<usize> = stats.groups.iter().map(|g| g.roc.len()).collect();
    let combos = sizes
        .iter()
        .try_fold(1u64, |acc, &n| acc.checked_mul(n as u64));

    let new_objective = || Objective {
        stats,
        loss,
        bounds: &bounds,
        cache: HashMap::new(),
    };
    let (_, best_idx) = match combos {
        Some(c) if c <= config.exhaustive_limit => {
            let mut obj = new_objective();
            let mut idx = vec![0; sizes.len()];
            let mut best: Option<(f64, Vec<usize>)> = None;
            'grid: loop {
                let f = obj.value(&idx)?;
                if best.as_ref().is_none_or(|b| better((f, &idx), (b.0, &b.1))) {
                    best = Some((f, idx.clone()));
                }
                // odometer increment, last subgroup fastest
                for s in (0..sizes.len()).rev() {
                    idx[s] += 1;
                    if idx[s] < sizes[s] {
                        continue 'grid;
                    }
                    idx[s] = 0;
                }
                break;
            }
            best.expect("grids are non-empty")
        }
        _ => {
            let mut starts = vec![indices_of(stats, &seq), indices_of(stats, &det)];
            for r in 0..config.restarts {
                let mut stream = rng.child(r as u64);
                starts.push(
                    sizes
                        .iter()
                        .map(|&n| stream.below(n as u64) as usize)
                        .collect(),
                );
            }
            let results = starts
                .into_par_iter()
                .map(|start| descend(&mut new_objective(), start, config.max_passes))
                .collect::<Result<Vec<_>>>()?;
            results
                .into_iter()
                .reduce(|a, b| {
                    if better((b.0, &b.1), (a.0, &a.1)) {
                        b
                    } else {
                        a
                    }
                })
                .expect("at least two starts")
        }
    };

    let (_, ps) = solve_at(stats, &best_idx, loss, &bounds, Form::Pairwise)?;
    let mut fit = Fit::evaluate(
        params_from(stats, &best_idx, &ps)?,
        stats,
        loss,
        constraints,
        false,
    )?;
    for other in [seq, det] {
        if other.loss < fit.loss && other.satisfies(constraints, 1e-9) {
            fit = other;
        }
    }
    fit.fallback = false;
    Ok(fit)
}
