//! Sensitive-attribute domains and the intersection space they span.
//!
//! Every subgroup `s ∈ A₁×…×A_p` is addressed two ways: as a
//! [`SubgroupKey`] (one category index per attribute) and as a dense
//! mixed-radix index in `0..|A|`. The dense index follows lexicographic key
//! order with the first attribute most significant, so iterating indices
//! and iterating sorted keys visit subgroups in the same order.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest intersection space accepted.
pub const MAX_SUBGROUPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Attribute>", into = "Vec<Attribute>")]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    size: usize,
}

/// One intersection `s`, stored as category indices in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubgroupKey(pub Vec<u32>);

impl SubgroupKey {
    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

impl AttributeSchema {
    pub fn new<N, L>(attributes: impl IntoIterator<Item = (N, Vec<L>)>) -> Result<Self>
    where
        N: Into<String>,
        L: Into<String>,
    {
        let attributes = attributes
            .into_iter()
            .map(|(name, labels)| Attribute {
                name: name.into(),
                labels: labels.into_iter().map(Into::into).collect(),
            })
            .collect();
        Self::from_attributes(attributes)
    }

    pub fn from_attributes(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::InvalidSchema("no sensitive attributes".into()));
        }
        let mut names = HashSet::new();
        let mut size: u128 = 1;
        for attr in &attributes {
            if !names.insert(attr.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate attribute `{}`",
                    attr.name
                )));
            }
            if attr.labels.is_empty() {
                return Err(Error::InvalidSchema(format!(
                    "attribute `{}` has an empty domain",
                    attr.name
                )));
            }
            let mut seen = HashSet::new();
            for label in &attr.labels {
                if !seen.insert(label.as_str()) {
                    return Err(Error::InvalidSchema(format!(
                        "attribute `{}` repeats label `{label}`",
                        attr.name
                    )));
                }
            }
            size = size.saturating_mul(attr.labels.len() as u128);
        }
        if size > MAX_SUBGROUPS as u128 {
            return Err(Error::SchemaTooLarge {
                size,
                limit: MAX_SUBGROUPS,
            });
        }
        Ok(Self {
            attributes,
            size: size as usize,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    /// `|A|`, the number of intersectional subgroups.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn label_index(&self, attribute: usize, label: &str) -> Option<u32> {
        self.attributes[attribute]
            .labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as u32)
    }

    pub fn validate_key(&self, key: &SubgroupKey) -> Result<()> {
        if key.0.len() != self.attributes.len() {
            return Err(Error::InvalidKey(format!(
                "key has {} values, schema has {} attributes",
                key.0.len(),
                self.attributes.len()
            )));
        }
        for (v, attr) in key.0.iter().zip(&self.attributes) {
            if *v as usize >= attr.labels.len() {
                return Err(Error::InvalidKey(format!(
                    "index {v} out of range for attribute `{}`",
                    attr.name
                )));
            }
        }
        Ok(())
    }

    /// Dense index of a key. The key must be valid for this schema.
    pub fn index_of(&self, key: &SubgroupKey) -> usize {
        key.0
            .iter()
            .zip(&self.attributes)
            .fold(0usize, |acc, (v, a)| acc * a.labels.len() + *v as usize)
    }

    pub fn key_at(&self, mut index: usize) -> SubgroupKey {
        let mut values = vec![0u32; self.attributes.len()];
        for (slot, attr) in values.iter_mut().zip(&self.attributes).rev() {
            let radix = attr.labels.len();
            *slot = (index % radix) as u32;
            index /= radix;
        }
        SubgroupKey(values)
    }

    /// Labels of a key, in schema order.
    pub fn labels_of(&self, key: &SubgroupKey) -> Vec<&str> {
        key.0
            .iter()
            .zip(&self.attributes)
            .map(|(v, a)| a.labels[*v as usize].as_str())
            .collect()
    }

    /// `name=label` pairs joined by commas, e.g. `gender=F,race=b`.
    pub fn render_key(&self, key: &SubgroupKey) -> String {
        key.0
            .iter()
            .zip(&self.attributes)
            .map(|(v, a)| format!("{}={}", a.name, a.labels[*v as usize]))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn render_index(&self, index: usize) -> String {
        self.render_key(&self.key_at(index))
    }

    /// Schema restricted to `keep` (in schema order), plus the positions of
    /// the kept attributes.
    pub fn project(&self, keep: &[&str]) -> Result<(AttributeSchema, Vec<usize>)> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument(
                "marginalization must keep at least one attribute".into(),
            ));
        }
        let mut positions = Vec::with_capacity(keep.len());
        for name in keep {
            let pos = self.attribute_index(name)?;
            if !positions.contains(&pos) {
                positions.push(pos);
            }
        }
        positions.sort_unstable();
        let attrs = positions
            .iter()
            .map(|&p| self.attributes[p].clone())
            .collect();
        Ok((AttributeSchema::from_attributes(attrs)?, positions))
    }
}

impl TryFrom<Vec<Attribute>> for AttributeSchema {
    type Error = Error;

    fn try_from(value: Vec<Attribute>) -> Result<Self> {
        Self::from_attributes(value)
    }
}

impl From<AttributeSchema> for Vec<Attribute> {
    fn from(value: AttributeSchema) -> Self {
        value.attributes
    }
}

impl fmt::Display for AttributeSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .attributes
            .iter()
            .map(|a| format!("{}[{}]", a.name, a.labels.len()))
            .collect();
        write!(f, "{} ({} subgroups)", parts.join(" x "), self.size)
    }
}

/// All `|A|` keys in lexicographic order.
pub fn enumerate_subgroups(schema: &AttributeSchema) -> Vec<SubgroupKey> {
    (0..schema.size()).map(|i| schema.key_at(i)).collect()
}
