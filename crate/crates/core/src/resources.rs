//! Named system resources and configurations over them.
//!
//! A [`ResourceSchema`] fixes the order of the configurable resources (core
//! count, frequencies, cache size, channels, threads per core, ...). A
//! [`ResourceVector`] is one system configuration: a strictly positive value
//! per resource, in the resource's natural unit.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column name reserved for the benchmark score in dataset files.
pub const SCORE_COLUMN: &str = "score";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ResourceSchema {
    names: Vec<String>,
}

fn valid_token(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl ResourceSchema {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Schema("at least one resource is required".into()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !valid_token(name) {
                return Err(Error::Schema(format!(
                    "resource name {name:?} must be a non-empty token of [A-Za-z0-9_.-]"
                )));
            }
            if name == SCORE_COLUMN {
                return Err(Error::Schema(format!("{SCORE_COLUMN:?} is reserved")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate resource {name:?}")));
            }
        }
        Ok(Self { names })
    }

    /// Number of resources, `k`.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Builds a vector from `(name, value)` pairs covering every resource.
    pub fn vector_from_pairs<'a, I>(&self, pairs: I) -> Result<ResourceVector>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut values = vec![None; self.len()];
        for (name, value) in pairs {
            let idx = self
                .index_of(name)
                .ok_or_else(|| Error::Schema(format!("unknown resource {name:?}")))?;
            if values[idx].replace(value).is_some() {
                return Err(Error::Schema(format!("resource {name:?} given twice")));
            }
        }
        let values = values
            .into_iter()
            .zip(&self.names)
            .map(|(v, name)| v.ok_or_else(|| Error::Schema(format!("missing resource {name:?}"))))
            .collect::<Result<Vec<_>>>()?;
        ResourceVector::new(self, values)
    }

    /// Human-readable `name=value` rendering of a configuration.
    pub fn describe(&self, config: &ResourceVector) -> String {
        self.names
            .iter()
            .zip(config.values())
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl TryFrom<Vec<String>> for ResourceSchema {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        ResourceSchema::new(names)
    }
}

impl From<ResourceSchema> for Vec<String> {
    fn from(schema: ResourceSchema) -> Self {
        schema.names
    }
}

/// One system configuration. Values are strictly positive and finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ResourceVector {
    values: Vec<f64>,
}

impl ResourceVector {
    pub fn new(schema: &ResourceSchema, values: Vec<f64>) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::domain(format!(
                "configuration has {} values, schema expects {}",
                values.len(),
                schema.len()
            )));
        }
        for (name, &v) in schema.names().iter().zip(&values) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "resource {name:?} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks that this vector has one value per resource of `schema`.
    pub fn conforms_to(&self, schema: &ResourceSchema) -> Result<()> {
        if self.len() == schema.len() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "configuration has {} values, schema expects {}",
                self.len(),
                schema.len()
            )))
        }
    }

    /// Lexicographic comparison of the raw values.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.values.iter().zip(&other.values) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.values.len().cmp(&other.values.len())
    }
}

impl fmt::Display for ResourceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}
