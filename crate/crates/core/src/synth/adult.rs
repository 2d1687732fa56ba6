//! An Adult-census-like population for end-to-end runs.
//!
//! Three sensitive columns (gender, age binned at 50, five race values)
//! give 20 subgroups. Income depends on the sensitive attributes directly
//! and through three non-sensitive features; the score comes from a
//! logistic stand-in fitted on the non-sensitive features only.

use std::io::Write;

use serde::Serialize;

use crate::data::{LabeledDataset, Row};
use crate::error::Result;
use crate::rng::RngStream;
use crate::schema::{AttributeSchema, SubgroupKey};
use crate::standin::LogisticModel;

pub const GENDERS: [&str; 2] = ["Female", "Male"];
pub const AGE_BINS: [&str; 2] = ["<=50", ">50"];
/// Sorted lexicographically, matching CSV ingestion.
pub const RACES: [&str; 5] = [
    "Amer-Indian-Eskimo",
    "Asian-Pac-Islander",
    "Black",
    "Other",
    "White",
];
const RACE_MASS: [f64; 5] = [0.0096, 0.031, 0.096, 0.0083, 0.8551];
const RACE_EFFECT: [f64; 5] = [-0.5, 0.3, -0.4, -0.5, 0.3];

/// Column names of the sensitive attributes, in schema order.
pub const SENSITIVE: [&str; 3] = ["gender", "age", "race"];
pub const OUTCOME: &str = "income";
pub const SCORE: &str = "score";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdultRecord {
    pub gender: &'static str,
    pub age: &'static str,
    pub race: &'static str,
    pub education_num: f64,
    pub hours_per_week: f64,
    pub married: u8,
    pub income: u8,
    pub score: f64,
}

impl AdultRecord {
    fn features(&self) -> Vec<f64> {
        vec![
            self.education_num,
            self.hours_per_week / 10.0,
            f64::from(self.married),
        ]
    }
}

pub fn adult_schema() -> AttributeSchema {
    AttributeSchema::new([
        ("gender", GENDERS.to_vec()),
        ("age", AGE_BINS.to_vec()),
        ("race", RACES.to_vec()),
    ])
    .expect("static schema is valid")
}

fn categorical(mass: &[f64], rng: &mut RngStream) -> usize {
    let mut u = rng.uniform() * mass.iter().sum::<f64>();
    for (i, &m) in mass.iter().enumerate() {
        if u < m {
            return i;
        }
        u -= m;
    }
    mass.len() - 1
}

/// `n` records with stand-in scores rounded to 0.001.
///
/// The stand-in is fitted on the generated records themselves, so scores
/// are in-sample; the fixture only needs a plausible black box.
pub fn adult_like(n: usize, rng: &RngStream) -> Result<Vec<AdultRecord>> {
    let mut draw = rng.child(0);
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let male = draw.bernoulli(0.67);
        let old = draw.bernoulli(0.2);
        let race = categorical(&RACE_MASS, &mut draw);
        let shift = if male { 0.3 } else { 0.0 } + RACE_EFFECT[race];
        let education_num = (10.0 + 1.5 * shift + 2.5 * draw.normal())
            .round()
            .clamp(1.0, 16.0);
        let hours_per_week = (40.0 + if male { 4.0 } else { -3.0 } + 11.0 * draw.normal())
            .round()
            .clamp(1.0, 99.0);
        let married = draw.bernoulli(if male { 0.6 } else { 0.3 } + if old { 0.1 } else { 0.0 });
        let logit = -8.2
            + 0.45 * education_num
            + 0.035 * hours_per_week
            + 1.8 * f64::from(u8::from(married))
            + if male { 0.5 } else { 0.0 }
            + if old { 0.4 } else { 0.0 }
            + RACE_EFFECT[race];
        let income = draw.bernoulli(1.0 / (1.0 + (-logit).exp()));
        records.push(AdultRecord {
            gender: GENDERS[usize::from(male)],
            age: AGE_BINS[usize::from(old)],
            race: RACES[race],
            education_num,
            hours_per_week,
            married: u8::from(married),
            income: u8::from(income),
            score: 0.0,
        });
    }
    let features: Vec<Vec<f64>> = records.iter().map(AdultRecord::features).collect();
    let labels: Vec<bool> = records.iter().map(|r| r.income == 1).collect();
    let model = LogisticModel::fit(&features, &labels)?;
    for (r, x) in records.iter_mut().zip(&features) {
        r.score = (model.predict(x) * 1000.0).round() / 1000.0;
    }
    Ok(records)
}

pub fn to_dataset(records: &[AdultRecord]) -> Result<LabeledDataset> {
    let schema = adult_schema();
    let mut data = LabeledDataset::new(schema.clone());
    for r in records {
        let key = SubgroupKey(vec![
            schema.label_index(0, r.gender).expect("known gender"),
            schema.label_index(1, r.age).expect("known age bin"),
            schema.label_index(2, r.race).expect("known race"),
        ]);
        data.push_row(Row {
            group: schema.index_of(&key),
            outcome: r.income == 1,
            prediction: Some(r.score),
        })?;
    }
    Ok(data)
}

pub fn write_csv(records: &[AdultRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
