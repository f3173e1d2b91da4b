//! Monomial feature terms and the reciprocal-transformed design matrix.
//!
//! Every modelled resource effect is a monomial `∏ r_j^{e_j}` with integer
//! exponents: single resources, pairwise products, higher-order products and
//! engineered quantities such as memory bandwidth per core. A term's
//! *enhancement ratio* between a baseline and a test configuration is the
//! monomial at the baseline divided by the monomial at the test
//! configuration. Those ratios are the regression features.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::resources::{ResourceSchema, ResourceVector};

/// A monomial over named resources.
///
/// Equality and hashing look at the exponent map only; the label is
/// presentation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureTerm {
    exponents: BTreeMap<String, i32>,
    label: String,
}

impl FeatureTerm {
    /// Builds a term from `(resource, exponent)` pairs. Repeated names add
    /// their exponents; zero exponents are dropped.
    pub fn new<I, S>(exponents: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, i32)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, e) in exponents {
            *map.entry(name.into()).or_insert(0) += e;
        }
        map.retain(|_, e| *e != 0);
        if map.is_empty() {
            return Err(Error::Spec(
                "a term needs at least one nonzero exponent".into(),
            ));
        }
        let label = String::new();
        let mut term = Self {
            exponents: map,
            label,
        };
        term.label = term.default_label();
        Ok(term)
    }

    pub fn single(name: &str) -> Self {
        Self::new([(name, 1)]).expect("nonzero exponent")
    }

    pub fn product(a: &str, b: &str) -> Self {
        Self::new([(a, 1), (b, 1)]).expect("nonzero exponent")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        let label = label.into();
        if !label.is_empty() {
            self.label = label;
        }
        self
    }

    pub fn exponents(&self) -> &BTreeMap<String, i32> {
        &self.exponents
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of resources the term involves.
    pub fn order(&self) -> usize {
        self.exponents.len()
    }

    fn default_label(&self) -> String {
        let render = |(name, e): (&String, i32)| {
            if e == 1 {
                name.clone()
            } else {
                format!("{name}^{e}")
            }
        };
        let num: Vec<String> = self
            .exponents
            .iter()
            .filter(|(_, &e)| e > 0)
            .map(|(n, &e)| render((n, e)))
            .collect();
        let den: Vec<String> = self
            .exponents
            .iter()
            .filter(|(_, &e)| e < 0)
            .map(|(n, &e)| render((n, -e)))
            .collect();
        match (num.is_empty(), den.is_empty()) {
            (false, true) => num.join("*"),
            (true, false) => format!("1/{}", den.join("*")),
            _ => format!("{}/{}", num.join("*"), den.join("*")),
        }
    }

    /// Resolves resource names to schema positions.
    pub(crate) fn compile(&self, schema: &ResourceSchema) -> Result<CompiledTerm> {
        let factors = self
            .exponents
            .iter()
            .map(|(name, &e)| {
                schema.index_of(name).map(|idx| (idx, e)).ok_or_else(|| {
                    Error::Spec(format!(
                        "term {:?} references unknown resource {name:?}",
                        self.label
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledTerm { factors })
    }

    /// Enhancement ratio of this term between `base` and `test`.
    pub fn ratio(
        &self,
        schema: &ResourceSchema,
        base: &ResourceVector,
        test: &ResourceVector,
    ) -> Result<f64> {
        base.conforms_to(schema)?;
        test.conforms_to(schema)?;
        Ok(self.compile(schema)?.ratio(base.values(), test.values()))
    }
}

impl PartialEq for FeatureTerm {
    fn eq(&self, other: &Self) -> bool {
        self.exponents == other.exponents
    }
}

impl Eq for FeatureTerm {}

impl Hash for FeatureTerm {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.exponents.hash(state);
    }
}

impl fmt::Display for FeatureTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// A term with resource names replaced by schema indices.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CompiledTerm {
    factors: Vec<(usize, i32)>,
}

impl CompiledTerm {
    #[inline]
    pub(crate) fn ratio(&self, base: &[f64], test: &[f64]) -> f64 {
        self.factors
            .iter()
            .map(|&(j, e)| (base[j] / test[j]).powi(e))
            .product()
    }
}

/// `∏_j (base_j / test_j)^{e_j}` for `term`.
pub fn term_ratio(
    term: &FeatureTerm,
    schema: &ResourceSchema,
    base: &ResourceVector,
    test: &ResourceVector,
) -> Result<f64> {
    term.ratio(schema, base, test)
}

/// Singles for every resource in schema order, optionally all pairwise
/// products `(i, j), i < j`, then `extra` terms. Duplicates keep their first
/// position.
///
/// Interactions of three or more resources only enter through `extra`.
pub fn standard_terms(
    schema: &ResourceSchema,
    include_pairwise: bool,
    extra: &[FeatureTerm],
) -> Result<Vec<FeatureTerm>> {
    let names = schema.names();
    let mut terms: Vec<FeatureTerm> = names.iter().map(|n| FeatureTerm::single(n)).collect();
    if include_pairwise {
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                terms.push(FeatureTerm::product(&names[i], &names[j]));
            }
        }
    }
    for term in extra {
        term.compile(schema)?;
        if !terms.contains(term) {
            terms.push(term.clone());
        }
    }
    Ok(terms)
}

/// Per-resource minimum over a set of configurations.
pub fn min_baseline<'a, I>(schema: &ResourceSchema, configs: I) -> Result<ResourceVector>
where
    I: IntoIterator<Item = &'a ResourceVector>,
{
    let mut mins = vec![f64::INFINITY; schema.len()];
    let mut any = false;
    for c in configs {
        c.conforms_to(schema)?;
        any = true;
        for (m, &v) in mins.iter_mut().zip(c.values()) {
            *m = m.min(v);
        }
    }
    if !any {
        return Err(Error::Spec(
            "cannot derive a baseline from zero configurations".into(),
        ));
    }
    ResourceVector::new(schema, mins)
}

/// Resource schema, ordered feature terms and the baseline configuration
/// that anchors every enhancement ratio.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSpec {
    schema: ResourceSchema,
    terms: Vec<FeatureTerm>,
    baseline: ResourceVector,
    #[serde(skip)]
    compiled: Vec<CompiledTerm>,
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.terms == other.terms && self.baseline == other.baseline
    }
}

impl ModelSpec {
    pub fn new(
        schema: ResourceSchema,
        terms: Vec<FeatureTerm>,
        baseline: ResourceVector,
    ) -> Result<Self> {
        baseline
            .conforms_to(&schema)
            .map_err(|e| Error::Spec(format!("baseline: {e}")))?;
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].contains(t) {
                return Err(Error::Spec(format!("duplicate term {:?}", t.label())));
            }
        }
        let compiled = terms
            .iter()
            .map(|t| t.compile(&schema))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schema,
            terms,
            baseline,
            compiled,
        })
    }

    pub fn schema(&self) -> &ResourceSchema {
        &self.schema
    }

    pub fn terms(&self) -> &[FeatureTerm] {
        &self.terms
    }

    pub fn baseline(&self) -> &ResourceVector {
        &self.baseline
    }

    /// Number of resource terms, intercept excluded.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Same schema and terms anchored at a different baseline.
    pub fn with_baseline(&self, baseline: ResourceVector) -> Result<Self> {
        Self::new(self.schema.clone(), self.terms.clone(), baseline)
    }

    /// Column labels of the design matrix, intercept first.
    pub fn column_labels(&self) -> Vec<String> {
        std::iter::once("intercept".to_string())
            .chain(self.terms.iter().map(|t| t.label().to_string()))
            .collect()
    }

    /// Writes the feature row `[1, ratio_1, ..., ratio_K]` for `config`.
    pub(crate) fn fill_features(&self, config: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        let base = self.baseline.values();
        for (o, t) in out[1..].iter_mut().zip(&self.compiled) {
            *o = t.ratio(base, config);
        }
    }

    /// Feature row `[1, ratio_1, ..., ratio_K]` for `config`.
    pub fn features(&self, config: &ResourceVector) -> Result<Vec<f64>> {
        config.conforms_to(&self.schema)?;
        let mut row = vec![0.0; self.terms.len() + 1];
        self.fill_features(config.values(), &mut row);
        Ok(row)
    }
}

/// Regression inputs: `X` with a leading all-ones column and target
/// `y_i = 1 / score_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub labels: Vec<String>,
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn cols(&self) -> usize {
        self.x.cols()
    }
}

/// Reciprocal-transformed design for `data` under `spec`. Row order is kept.
pub fn build_design(spec: &ModelSpec, data: &Dataset) -> Result<DesignMatrix> {
    let data = data.project(spec.schema())?;
    let k = spec.term_count() + 1;
    let mut x = Matrix::zeros(data.len(), k);
    let mut y = Vec::with_capacity(data.len());
    for (i, obs) in data.observations().iter().enumerate() {
        if !(obs.score.is_finite() && obs.score > 0.0) {
            return Err(Error::Design {
                row: i,
                message: format!("score must be positive, got {}", obs.score),
            });
        }
        spec.fill_features(obs.config.values(), x.row_mut(i));
        if let Some((c, v)) = x
            .row(i)
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Design {
                row: i,
                message: format!("feature {:?} evaluates to {v}", spec.column_labels()[c]),
            });
        }
        y.push(1.0 / obs.score);
    }
    Ok(DesignMatrix {
        x,
        y,
        labels: spec.column_labels(),
    })
}
