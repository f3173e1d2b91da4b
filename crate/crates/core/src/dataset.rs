//! Benchmark measurement tables.
//!
//! The on-disk format is CSV with a header row: one column per resource
//! followed by a final `score` column. Scores are "higher is better"; metrics
//! where lower is better must be inverted before ingestion. Repeated
//! configurations (multiple runs) are allowed.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::resources::{ResourceSchema, ResourceVector, SCORE_COLUMN};

/// One benchmark run: a configuration and the score it achieved.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub config: ResourceVector,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: ResourceSchema,
    rows: Vec<Observation>,
    source: String,
}

impl Dataset {
    pub fn new(
        schema: ResourceSchema,
        rows: Vec<Observation>,
        source: impl Into<String>,
    ) -> Result<Self> {
        for (i, obs) in rows.iter().enumerate() {
            obs.config.conforms_to(&schema).map_err(|e| Error::Design {
                row: i,
                message: e.to_string(),
            })?;
            if !(obs.score.is_finite() && obs.score > 0.0) {
                return Err(Error::Design {
                    row: i,
                    message: format!("score must be positive, got {}", obs.score),
                });
            }
        }
        Ok(Self {
            schema,
            rows,
            source: source.into(),
        })
    }

    pub fn schema(&self) -> &ResourceSchema {
        &self.schema
    }

    pub fn observations(&self) -> &[Observation] {
        &self.rows
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of runs `m_q`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn configs(&self) -> impl Iterator<Item = &ResourceVector> {
        self.rows.iter().map(|o| &o.config)
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|o| o.score)
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            source: self.source.clone(),
        }
    }

    /// Reorders columns to match `target`, dropping resources it does not
    /// name. Every resource of `target` must be present.
    pub fn project(&self, target: &ResourceSchema) -> Result<Dataset> {
        if &self.schema == target {
            return Ok(self.clone());
        }
        let map = target
            .names()
            .iter()
            .map(|n| {
                self.schema.index_of(n).ok_or_else(|| {
                    Error::Schema(format!(
                        "dataset {:?} has no column for resource {n:?}",
                        self.source
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = self
            .rows
            .iter()
            .map(|o| {
                let v = map.iter().map(|&j| o.config.values()[j]).collect();
                Ok(Observation {
                    config: ResourceVector::new(target, v)?,
                    score: o.score,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            schema: target.clone(),
            rows,
            source: self.source.clone(),
        })
    }

    /// Serialises to the CSV dataset format. Numbers use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for name in self.schema.names() {
            out.push_str(name);
            out.push(',');
        }
        out.push_str(SCORE_COLUMN);
        out.push('\n');
        for obs in &self.rows {
            for v in obs.config.values() {
                out.push_str(&v.to_string());
                out.push(',');
            }
            out.push_str(&obs.score.to_string());
            out.push('\n');
        }
        out
    }
}

fn parse_positive(field: &str, column: &str) -> std::result::Result<f64, String> {
    let field = field.trim();
    if field.is_empty() {
        return Err(format!("missing value for {column:?}"));
    }
    let v: f64 = field
        .parse()
        .map_err(|_| format!("non-numeric value {field:?} for {column:?}"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("{column:?} must be positive, got {field}"));
    }
    Ok(v)
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn header_error(source: &str, message: impl Into<String>) -> Error {
    Error::Row {
        source_label: source.to_string(),
        line: 1,
        message: message.into(),
    }
}

/// Parses a dataset from CSV text read from `input`.
pub fn parse_dataset<R: Read>(input: R, source: &str) -> Result<Dataset> {
    let mut rdr = csv_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| header_error(source, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let score_at = names
        .iter()
        .position(|n| *n == SCORE_COLUMN)
        .ok_or_else(|| header_error(source, format!("missing {SCORE_COLUMN:?} column")))?;
    if score_at + 1 != names.len() {
        return Err(header_error(
            source,
            format!("{SCORE_COLUMN:?} must be the last column"),
        ));
    }
    let schema = ResourceSchema::new(names[..score_at].iter().copied())
        .map_err(|e| header_error(source, e.to_string()))?;

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Row {
            source_label: source.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row_err = |message: String| Error::Row {
            source_label: source.to_string(),
            line,
            message,
        };
        if record.len() != names.len() {
            return Err(row_err(format!(
                "expected {} fields, found {}",
                names.len(),
                record.len()
            )));
        }
        let mut values = Vec::with_capacity(schema.len());
        for (field, name) in record.iter().zip(&names).take(score_at) {
            values.push(parse_positive(field, name).map_err(row_err)?);
        }
        let score = parse_positive(&record[score_at], SCORE_COLUMN).map_err(row_err)?;
        let config = ResourceVector::new(&schema, values).map_err(|e| row_err(e.to_string()))?;
        rows.push(Observation { config, score });
    }
    Dataset::new(schema, rows, source)
}

/// Loads a dataset CSV file.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(text.as_slice(), &path.display().to_string())
}

/// Parses configurations (no scores needed) for `schema` from CSV text.
/// Columns are matched by name; extra columns such as `score` are ignored.
pub fn parse_configs<R: Read>(
    input: R,
    source: &str,
    schema: &ResourceSchema,
) -> Result<Vec<ResourceVector>> {
    let mut rdr = csv_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| header_error(source, e.to_string()))?
        .clone();
    let columns = schema
        .names()
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| header_error(source, format!("missing column {n:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut configs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Row {
            source_label: source.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row_err = |message: String| Error::Row {
            source_label: source.to_string(),
            line,
            message,
        };
        let values = columns
            .iter()
            .zip(schema.names())
            .map(|(&c, name)| parse_positive(record.get(c).unwrap_or(""), name).map_err(row_err))
            .collect::<Result<Vec<_>>>()?;
        configs.push(ResourceVector::new(schema, values).map_err(|e| row_err(e.to_string()))?);
    }
    Ok(configs)
}

pub fn load_configs(
    path: impl AsRef<Path>,
    schema: &ResourceSchema,
) -> Result<Vec<ResourceVector>> {
    let path = path.as_ref();
    let text = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_configs(text.as_slice(), &path.display().to_string(), schema)
}
