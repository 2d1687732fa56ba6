use std::collections::BTreeSet;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::data::{LabeledDataset, Row};
use crate::error::{Error, Result};
use crate::schema::{AttributeSchema, SubgroupKey};

/// A CSV file held in memory with its header. Row numbers in errors are
/// 1-based and count data rows only.
#[derive(Debug, Clone)]
pub struct CsvTable {
    headers: StringRecord,
    records: Vec<StringRecord>,
}

impl CsvTable {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut reader = ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let headers = reader.headers()?.clone();
        let records = reader
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { headers, records })
    }

    pub fn headers(&self) -> impl Iterator<Item = &str> {
        self.headers.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    fn cell(&self, row: usize, col: usize) -> &str {
        self.records[row].get(col).unwrap_or("").trim()
    }

    /// Schema whose domains are the observed values of `sensitive`, sorted.
    pub fn infer_schema(&self, sensitive: &[&str]) -> Result<AttributeSchema> {
        let mut attrs = Vec::with_capacity(sensitive.len());
        for &name in sensitive {
            let col = self.column(name)?;
            let labels: BTreeSet<&str> = (0..self.len()).map(|r| self.cell(r, col)).collect();
            attrs.push((name, labels.into_iter().collect::<Vec<_>>()));
        }
        AttributeSchema::new(attrs)
    }

    /// Subgroup index of every row under `schema`; the sensitive columns are
    /// the schema's attribute names.
    pub fn subgroups(&self, schema: &AttributeSchema) -> Result<Vec<usize>> {
        let cols = schema
            .attributes()
            .iter()
            .map(|a| self.column(&a.name))
            .collect::<Result<Vec<_>>>()?;
        (0..self.len())
            .map(|r| {
                let key = cols
                    .iter()
                    .enumerate()
                    .map(|(a, &c)| {
                        let label = self.cell(r, c);
                        schema.label_index(a, label).ok_or_else(|| {
                            Error::SchemaMismatch(format!(
                                "row {}: `{}` has no category `{label}`",
                                r + 1,
                                schema.attributes()[a].name
                            ))
                        })
                    })
                    .collect::<Result<Vec<u32>>>()?;
                Ok(schema.index_of(&SubgroupKey(key)))
            })
            .collect()
    }

    pub fn outcomes(&self, column: &str) -> Result<Vec<bool>> {
        let col = self.column(column)?;
        (0..self.len())
            .map(|r| {
                let v = self.cell(r, col);
                match v.parse::<f64>() {
                    Ok(0.0) => Ok(false),
                    Ok(1.0) => Ok(true),
                    _ => Err(Error::OutcomeNotBinary {
                        row: r + 1,
                        value: v.to_string(),
                    }),
                }
            })
            .collect()
    }

    pub fn scores(&self, column: &str) -> Result<Vec<f64>> {
        let col = self.column(column)?;
        (0..self.len())
            .map(|r| {
                let v = self.cell(r, col);
                let x: f64 = v.parse().map_err(|_| Error::Parse {
                    row: r + 1,
                    column: column.to_string(),
                    message: format!("`{v}` is not a number"),
                })?;
                if (0.0..=1.0).contains(&x) {
                    Ok(x)
                } else {
                    Err(Error::PredictionOutOfRange {
                        row: r + 1,
                        value: x,
                    })
                }
            })
            .collect()
    }

    /// Labelled rows under `schema`.
    pub fn to_dataset(
        &self,
        schema: &AttributeSchema,
        outcome: &str,
        prediction: Option<&str>,
    ) -> Result<LabeledDataset> {
        let groups = self.subgroups(schema)?;
        let outcomes = self.outcomes(outcome)?;
        let scores = prediction.map(|p| self.scores(p)).transpose()?;
        let rows = (0..self.len())
            .map(|r| Row {
                group: groups[r],
                outcome: outcomes[r],
                prediction: scores.as_ref().map(|s| s[r]),
            })
            .collect();
        LabeledDataset::with_rows(schema.clone(), rows)
    }

    /// The table with one more column, written as CSV.
    pub fn with_column(&self, name: &str, values: &[String]) -> Result<Vec<u8>> {
        if values.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} rows",
                values.len(),
                self.len()
            )));
        }
        let mut w = WriterBuilder::new().from_writer(Vec::new());
        let mut header = self.headers.clone();
        header.push_field(name);
        w.write_record(&header)?;
        for (rec, v) in self.records.iter().zip(values) {
            let mut rec = rec.clone();
            rec.push_field(v);
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Reads a CSV and infers the schema from the sensitive columns.
pub fn load_csv(
    path: &Path,
    sensitive: &[&str],
    outcome: &str,
    prediction: Option<&str>,
) -> Result<LabeledDataset> {
    let table = CsvTable::from_bytes(&std::fs::read(path)?)?;
    let schema = table.infer_schema(sensitive)?;
    table.to_dataset(&schema, outcome, prediction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counts::build_counts;

    const SMALL: &str = "gender,race,y\nF,A,1\nM,B,0\nF,A,0\n\"M\",A,1\n";

    #[test]
    fn hand_tally() {
        let t = CsvTable::from_bytes(SMALL.as_bytes()).unwrap();
        let schema = t.infer_schema(&["gender", "race"]).unwrap();
        let d = t.to_dataset(&schema, "y", None).unwrap();
        let c = build_counts(&d, None).unwrap();
        // subgroups in order F/A, F/B, M/A, M/B
        assert_eq!(c.n_all(), &[2, 0, 1, 1]);
        assert_eq!(c.n1_all(), &[1, 0, 1, 0]);
    }

    #[test]
    fn domains_are_sorted() {
        let t = CsvTable::from_bytes(b"a,y\nz,0\nb,1\nm,0\n").unwrap();
        let s = t.infer_schema(&["a"]).unwrap();
        assert_eq!(s.attributes()[0].labels, vec!["b", "m", "z"]);
    }

    #[test]
    fn error_locations() {
        let t = CsvTable::from_bytes(b"g,y,p\na,0,0.5\na,2,0.5\n").unwrap();
        let s = t.infer_schema(&["g"]).unwrap();
        assert!(matches!(
            t.to_dataset(&s, "y", None),
            Err(Error::OutcomeNotBinary { row: 2, .. })
        ));
        assert!(matches!(
            t.infer_schema(&["nope"]),
            Err(Error::UnknownColumn(_))
        ));
        let t = CsvTable::from_bytes(b"g,y,p\na,0,1.5\n").unwrap();
        assert!(matches!(
            t.scores("p"),
            Err(Error::PredictionOutOfRange { row: 1, .. })
        ));
        let t = CsvTable::from_bytes(b"g,y,p\na,0,x\n").unwrap();
        assert!(matches!(t.scores("p"), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn unknown_category_is_a_mismatch() {
        let s = AttributeSchema::new([("g", vec!["a"])]).unwrap();
        let t = CsvTable::from_bytes(b"g,y\nb,0\n").unwrap();
        assert!(matches!(t.subgroups(&s), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn appended_column_keeps_rows() {
        let t = CsvTable::from_bytes(SMALL.as_bytes()).unwrap();
        let vals: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let out = String::from_utf8(t.with_column("post", &vals).unwrap()).unwrap();
        assert_eq!(
            out,
            "gender,race,y,post\nF,A,1,0\nM,B,0,1\nF,A,0,2\nM,A,1,3\n"
        );
    }
}
