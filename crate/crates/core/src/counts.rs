//! Per-subgroup tallies `N_s`, `N_{1,s}` and confusion counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::schema::{AttributeSchema, SubgroupKey};

/// Score-to-label cut used when none is given.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

/// Subgroups with `n_s = 0` stay in the table; see [`CountsTable::empty_subgroups`].
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    schema: AttributeSchema,
    n: Vec<u64>,
    n1: Vec<u64>,
    confusion: Option<Vec<Confusion>>,
    total_n: u64,
    total_n1: u64,
}

/// Number of tally cells per subgroup in [`CountsTable::from_cells`]:
/// outcome × predicted label.
pub const CELLS_PER_GROUP: usize = 4;

/// Cell code of one observation inside its subgroup block.
#[inline]
pub fn cell_code(group: usize, outcome: bool, predicted: bool) -> usize {
    group * CELLS_PER_GROUP + (outcome as usize) * 2 + predicted as usize
}

impl CountsTable {
    /// Checks the table invariants and derives the totals.
    pub fn from_parts(
        schema: AttributeSchema,
        n: Vec<u64>,
        n1: Vec<u64>,
        confusion: Option<Vec<Confusion>>,
    ) -> Result<Self> {
        let k = schema.size();
        if n.len() != k || n1.len() != k {
            return Err(Error::InvalidArgument(format!(
                "count vectors must have {k} entries"
            )));
        }
        for s in 0..k {
            if n1[s] > n[s] {
                return Err(Error::InvalidArgument(format!(
                    "subgroup {s}: n1={} exceeds n={}",
                    n1[s], n[s]
                )));
            }
        }
        if let Some(conf) = &confusion {
            if conf.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "confusion vector must have {k} entries"
                )));
            }
            for (s, c) in conf.iter().enumerate() {
                if c.total() != n[s] || c.tp + c.fn_ != n1[s] {
                    return Err(Error::InvalidArgument(format!(
                        "subgroup {s}: confusion counts inconsistent with n/n1"
                    )));
                }
            }
        }
        let total_n = n.iter().sum();
        let total_n1 = n1.iter().sum();
        Ok(Self {
            schema,
            n,
            n1,
            confusion,
            total_n,
            total_n1,
        })
    }

    /// Builds a table from a flat tally laid out by [`cell_code`].
    pub fn from_cells(schema: AttributeSchema, cells: &[u64], with_confusion: bool) -> Self {
        let k = schema.size();
        debug_assert_eq!(cells.len(), k * CELLS_PER_GROUP);
        let mut n = vec![0u64; k];
        let mut n1 = vec![0u64; k];
        let mut conf = vec![Confusion::default(); k];
        for s in 0..k {
            let c = &cells[s * CELLS_PER_GROUP..(s + 1) * CELLS_PER_GROUP];
            // [y0 ŷ0, y0 ŷ1, y1 ŷ0, y1 ŷ1]
            conf[s] = Confusion {
                tn: c[0],
                fp: c[1],
                fn_: c[2],
                tp: c[3],
            };
            n[s] = c.iter().sum();
            n1[s] = c[2] + c[3];
        }
        let total_n = n.iter().sum();
        let total_n1 = n1.iter().sum();
        Self {
            schema,
            n,
            n1,
            confusion: with_confusion.then_some(conf),
            total_n,
            total_n1,
        }
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn n(&self, s: usize) -> u64 {
        self.n[s]
    }

    pub fn n1(&self, s: usize) -> u64 {
        self.n1[s]
    }

    pub fn n_all(&self) -> &[u64] {
        &self.n
    }

    pub fn n1_all(&self) -> &[u64] {
        &self.n1
    }

    pub fn confusion(&self) -> Option<&[Confusion]> {
        self.confusion.as_deref()
    }

    pub fn total_n(&self) -> u64 {
        self.total_n
    }

    pub fn total_n1(&self) -> u64 {
        self.total_n1
    }

    pub fn get(&self, key: &SubgroupKey) -> Result<(u64, u64)> {
        self.schema.validate_key(key)?;
        let s = self.schema.index_of(key);
        Ok((self.n[s], self.n1[s]))
    }

    /// Subgroups with no observations.
    pub fn empty_subgroups(&self) -> Vec<usize> {
        (0..self.n.len()).filter(|&s| self.n[s] == 0).collect()
    }
}

/// Tallies a dataset.
///
/// With `threshold = Some(t)` every row needs a prediction and confusion
/// counts use `ŷ ≥ t`. With `None`, confusion counts are built at
/// [`DEFAULT_THRESHOLD`] when all rows carry predictions and omitted
/// otherwise.
pub fn build_counts(data: &LabeledDataset, threshold: Option<f64>) -> Result<CountsTable> {
    let cut = match threshold {
        Some(t) => {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidArgument(format!(
                    "threshold {t} outside [0,1]"
                )));
            }
            if let Some(row) = data.rows().iter().position(|r| r.prediction.is_none()) {
                return Err(Error::MissingPrediction { row });
            }
            Some(t)
        }
        None if data.has_predictions() => Some(DEFAULT_THRESHOLD),
        None => None,
    };
    let k = data.schema().size();
    let cells = data
        .rows()
        .par_chunks(1 << 16)
        .fold(
            || vec![0u64; k * CELLS_PER_GROUP],
            |mut acc, chunk| {
                for r in chunk {
                    let predicted = match (cut, r.prediction) {
                        (Some(t), Some(p)) => p >= t,
                        _ => false,
                    };
                    acc[cell_code(r.group, r.outcome, predicted)] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; k * CELLS_PER_GROUP],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(CountsTable::from_cells(
        data.schema().clone(),
        &cells,
        cut.is_some(),
    ))
}

/// Sums counts over every attribute not named in `keep`.
pub fn marginalize(counts: &CountsTable, keep: &[&str]) -> Result<CountsTable> {
    let schema = counts.schema();
    let (projected, positions) = schema.project(keep)?;
    let k = projected.size();
    let mut n = vec![0u64; k];
    let mut n1 = vec![0u64; k];
    let mut conf = counts.confusion().map(|_| vec![Confusion::default(); k]);
    for s in 0..schema.size() {
        let full = schema.key_at(s);
        let key = SubgroupKey(positions.iter().map(|&p| full.0[p]).collect());
        let t = projected.index_of(&key);
        n[t] += counts.n[s];
        n1[t] += counts.n1[s];
        if let (Some(dst), Some(src)) = (conf.as_mut(), counts.confusion()) {
            dst[t].add(&src[s]);
        }
    }
    CountsTable::from_parts(projected, n, n1, conf)
}
