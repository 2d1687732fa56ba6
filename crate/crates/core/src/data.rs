use crate::error::{Error, Result};
use crate::schema::{AttributeSchema, SubgroupKey};

/// One observation. `group` is the dense subgroup index in the owning
/// dataset's schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub group: usize,
    pub outcome: bool,
    pub prediction: Option<f64>,
}

/// Rows sharing one attribute schema.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    schema: AttributeSchema,
    rows: Vec<Row>,
}

impl LabeledDataset {
    pub fn new(schema: AttributeSchema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn with_rows(schema: AttributeSchema, rows: Vec<Row>) -> Result<Self> {
        let mut data = Self::new(schema);
        data.rows.reserve(rows.len());
        for row in rows {
            data.push_row(row)?;
        }
        Ok(data)
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(
        &mut self,
        key: &SubgroupKey,
        outcome: bool,
        prediction: Option<f64>,
    ) -> Result<()> {
        self.schema.validate_key(key)?;
        let group = self.schema.index_of(key);
        self.push_row(Row {
            group,
            outcome,
            prediction,
        })
    }

    pub fn push_row(&mut self, row: Row) -> Result<()> {
        if row.group >= self.schema.size() {
            return Err(Error::InvalidRow {
                row: self.rows.len(),
                message: format!("subgroup index {} out of range", row.group),
            });
        }
        if let Some(p) = row.prediction {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::PredictionOutOfRange {
                    row: self.rows.len(),
                    value: p,
                });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn key_of(&self, row: &Row) -> SubgroupKey {
        self.schema.key_at(row.group)
    }

    pub fn has_predictions(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.prediction.is_some())
    }

    /// The same rows with every attribute outside `keep` removed.
    pub fn project(&self, keep: &[&str]) -> Result<LabeledDataset> {
        let (schema, positions) = self.schema.project(keep)?;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let full = self.schema.key_at(r.group);
                let key = SubgroupKey(positions.iter().map(|&p| full.0[p]).collect());
                Row {
                    group: schema.index_of(&key),
                    ..*r
                }
            })
            .collect();
        Ok(LabeledDataset { schema, rows })
    }
}
