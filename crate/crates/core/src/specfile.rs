//! JSON documents describing what to fit and what to generate.
//!
//! Model spec:
//!
//! ```json
//! {
//!   "resources": ["cores", "core_freq_mhz", "mem_freq_mhz", "mem_channels"],
//!   "include_pairwise": false,
//!   "terms": [
//!     {"cores": 1},
//!     {"mem_freq_mhz": 1, "mem_channels": 1, "cores": -1, "label": "bandwidth-per-core"}
//!   ],
//!   "baseline": {"cores": 1, "core_freq_mhz": 1800, "mem_freq_mhz": 2133, "mem_channels": 6}
//! }
//! ```
//!
//! A term is either a bare `{resource: exponent}` map with an optional
//! `label`, or `{"exponents": {...}, "label": ...}`. Term selection:
//! `include_pairwise` yields every single and pairwise term followed by the
//! listed ones; otherwise `include_singles` (default: true only when no terms
//! are listed) prepends the singles; otherwise the listed terms are used as
//! is. A missing baseline defaults to the per-resource minimum of the data.
//!
//! A ground-truth document is a model spec with a mandatory baseline, a
//! `baseline_perf` score, an optional `serial` fraction and a `fraction` on
//! every term, so it loads as a model spec too.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::{min_baseline, standard_terms, FeatureTerm, ModelSpec};
use crate::ranges::{RangeTable, ResourceRange};
use crate::resources::{ResourceSchema, ResourceVector};
use crate::speedup::FractionSet;
use crate::synthetic::GroundTruth;

pub const TRUTH_FORMAT: &str = "amdahl-truth/1";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn format_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Well-known engineered quantities, matched on exponent maps.
/// Accepted spellings of a resource and its exponent.
type Factor = (&'static [&'static str], i32);

const ENGINEERED: &[(&str, &[Factor])] = &[
    (
        "bandwidth-per-core",
        &[
            (&["mem_freq", "mem_freq_mhz"], 1),
            (&["mem_channels"], 1),
            (&["cores"], -1),
        ],
    ),
    ("llc-per-core", &[(&["llc", "llc_mb"], 1), (&["cores"], -1)]),
];

fn engineered_label(term: &FeatureTerm) -> Option<&'static str> {
    ENGINEERED.iter().find_map(|(label, factors)| {
        let matches = term.exponents().len() == factors.len()
            && factors
                .iter()
                .all(|(aliases, e)| aliases.iter().any(|a| term.exponents().get(*a) == Some(e)));
        matches.then_some(*label)
    })
}

fn parse_exponent(name: &str, v: &Value) -> Result<i32> {
    v.as_i64()
        .and_then(|e| i32::try_from(e).ok())
        .ok_or_else(|| Error::Spec(format!("exponent for {name:?} must be an integer, got {v}")))
}

/// Parses one term object; keys other than exponents and `label` are left
/// to the caller.
fn parse_term(value: &Value, reserved: &[&str]) -> Result<FeatureTerm> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Spec(format!("term must be an object, got {value}")))?;
    let label = match obj.get("label") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => {
            return Err(Error::Spec(format!(
                "term label must be a string, got {other}"
            )))
        }
    };
    let exponents: Vec<(String, i32)> = match obj.get("exponents") {
        Some(Value::Object(map)) => map
            .iter()
            .map(|(k, v)| Ok((k.clone(), parse_exponent(k, v)?)))
            .collect::<Result<_>>()?,
        Some(other) => {
            return Err(Error::Spec(format!(
                "term exponents must be an object, got {other}"
            )))
        }
        None => obj
            .iter()
            .filter(|(k, _)| k.as_str() != "label" && !reserved.contains(&k.as_str()))
            .map(|(k, v)| Ok((k.clone(), parse_exponent(k, v)?)))
            .collect::<Result<_>>()?,
    };
    let term = FeatureTerm::new(exponents)?;
    Ok(match label {
        Some(l) => term.with_label(l),
        None => match engineered_label(&term) {
            Some(l) => term.with_label(l),
            None => term,
        },
    })
}

fn term_value(term: &FeatureTerm, fraction: Option<f64>) -> Value {
    let mut obj = Map::new();
    let exps: Map<String, Value> = term
        .exponents()
        .iter()
        .map(|(k, v)| (k.clone(), Value::from(*v)))
        .collect();
    obj.insert("exponents".into(), Value::Object(exps));
    obj.insert("label".into(), Value::from(term.label()));
    if let Some(f) = fraction {
        obj.insert("fraction".into(), Value::from(f));
    }
    Value::Object(obj)
}

#[derive(Debug, Deserialize)]
struct SpecDoc {
    resources: Vec<String>,
    #[serde(default)]
    include_pairwise: bool,
    #[serde(default)]
    include_singles: Option<bool>,
    #[serde(default)]
    terms: Vec<Value>,
    #[serde(default)]
    baseline: Option<BTreeMap<String, f64>>,
}

/// A model spec whose baseline may still be pending on the data.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecDraft {
    pub schema: ResourceSchema,
    pub terms: Vec<FeatureTerm>,
    pub baseline: Option<ResourceVector>,
}

impl SpecDraft {
    /// Fixes the baseline: the declared one, or the per-resource minimum of
    /// `data`.
    pub fn resolve(&self, data: &Dataset) -> Result<ModelSpec> {
        let baseline = match &self.baseline {
            Some(b) => b.clone(),
            None => {
                let data = data.project(&self.schema)?;
                min_baseline(&self.schema, data.configs())?
            }
        };
        ModelSpec::new(self.schema.clone(), self.terms.clone(), baseline)
    }

    pub fn with_baseline(&self, baseline: ResourceVector) -> Result<ModelSpec> {
        ModelSpec::new(self.schema.clone(), self.terms.clone(), baseline)
    }
}

fn baseline_from_map(
    schema: &ResourceSchema,
    map: &BTreeMap<String, f64>,
) -> Result<ResourceVector> {
    schema
        .vector_from_pairs(map.iter().map(|(k, v)| (k.as_str(), *v)))
        .map_err(|e| Error::Spec(format!("baseline: {e}")))
}

fn parse_spec_doc(doc: SpecDoc, reserved: &[&str]) -> Result<SpecDraft> {
    let schema = ResourceSchema::new(doc.resources)?;
    let listed = doc
        .terms
        .iter()
        .map(|t| parse_term(t, reserved))
        .collect::<Result<Vec<_>>>()?;
    for (i, t) in listed.iter().enumerate() {
        if listed[..i].contains(t) {
            return Err(Error::Spec(format!("duplicate term {:?}", t.label())));
        }
    }
    let terms = if doc.include_pairwise {
        standard_terms(&schema, true, &listed)?
    } else if doc.include_singles.unwrap_or(listed.is_empty()) {
        standard_terms(&schema, false, &listed)?
    } else {
        for t in &listed {
            t.compile(&schema)?;
        }
        listed
    };
    if terms.is_empty() {
        return Err(Error::Spec("model has no terms".into()));
    }
    let baseline = doc
        .baseline
        .as_ref()
        .map(|m| baseline_from_map(&schema, m))
        .transpose()?;
    Ok(SpecDraft {
        schema,
        terms,
        baseline,
    })
}

/// Parses a model spec document.
pub fn parse_model_spec(text: &str) -> Result<SpecDraft> {
    let doc: SpecDoc = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    parse_spec_doc(doc, &["fraction"])
}

pub fn load_model_spec(path: impl AsRef<Path>) -> Result<SpecDraft> {
    let path = path.as_ref();
    parse_model_spec(&read_text(path)?).map_err(|e| format_err(path, e))
}

/// Serialises a resolved spec in the model-spec format.
pub fn spec_to_json(spec: &ModelSpec) -> String {
    serde_json::to_string_pretty(&spec_value(spec)).expect("spec serialises")
}

fn spec_value(spec: &ModelSpec) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert(
        "resources".into(),
        Value::from(spec.schema().names().to_vec()),
    );
    obj.insert(
        "terms".into(),
        Value::Array(spec.terms().iter().map(|t| term_value(t, None)).collect()),
    );
    obj.insert("baseline".into(), baseline_value(spec));
    obj
}

fn baseline_value(spec: &ModelSpec) -> Value {
    Value::Object(
        spec.schema()
            .names()
            .iter()
            .zip(spec.baseline().values())
            .map(|(n, v)| (n.clone(), Value::from(*v)))
            .collect(),
    )
}

#[derive(Debug, Deserialize)]
struct TruthExtras {
    #[serde(default)]
    format: Option<String>,
    baseline_perf: f64,
    #[serde(default)]
    serial: Option<f64>,
    terms: Vec<Value>,
}

pub fn parse_ground_truth(text: &str) -> Result<GroundTruth> {
    let extras: TruthExtras = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    if let Some(f) = &extras.format {
        if f != TRUTH_FORMAT {
            return Err(Error::Spec(format!(
                "unsupported format {f:?}, expected {TRUTH_FORMAT:?}"
            )));
        }
    }
    let mut doc: SpecDoc = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    // Ground truth lists its terms exactly.
    doc.include_pairwise = false;
    doc.include_singles = Some(false);
    let draft = parse_spec_doc(doc, &["fraction"])?;
    let baseline = draft
        .baseline
        .clone()
        .ok_or_else(|| Error::Spec("ground truth needs an explicit baseline".into()))?;

    let entries = draft
        .terms
        .iter()
        .zip(&extras.terms)
        .map(|(term, raw)| {
            let f = raw.get("fraction").and_then(Value::as_f64).ok_or_else(|| {
                Error::Spec(format!("term {:?} has no numeric fraction", term.label()))
            })?;
            Ok((term.clone(), f))
        })
        .collect::<Result<Vec<_>>>()?;
    let fractions = match extras.serial {
        Some(s) => FractionSet::new(s, entries),
        None => FractionSet::with_serial_remainder(entries),
    }
    .map_err(|e| Error::Spec(e.to_string()))?;
    let spec = draft.with_baseline(baseline)?;
    GroundTruth::new(spec, fractions, extras.baseline_perf)
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    parse_ground_truth(&read_text(path)?).map_err(|e| format_err(path, e))
}

pub fn ground_truth_to_json(truth: &GroundTruth) -> String {
    let spec = truth.spec();
    let mut obj = Map::new();
    obj.insert("format".into(), Value::from(TRUTH_FORMAT));
    obj.insert(
        "resources".into(),
        Value::from(spec.schema().names().to_vec()),
    );
    obj.insert("baseline".into(), baseline_value(spec));
    obj.insert("baseline_perf".into(), Value::from(truth.baseline_perf()));
    obj.insert("serial".into(), Value::from(truth.fractions().serial()));
    obj.insert(
        "terms".into(),
        Value::Array(
            spec.terms()
                .iter()
                .map(|t| term_value(t, truth.fractions().get(t)))
                .collect(),
        ),
    );
    serde_json::to_string_pretty(&Value::Object(obj)).expect("truth serialises")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RangesDoc {
    resources: Vec<RangeDoc>,
}

/// Parses a range table:
/// `{"resources": [{"name": "cores", "min": 1, "max": 28, "step": 1},
/// {"name": "mem_freq_mhz", "levels": [2133, 2400, 2667]}]}`.
/// `min`/`max` without a step means just those two levels.
pub fn parse_ranges(text: &str) -> Result<RangeTable> {
    let doc: RangesDoc = serde_json::from_str(text).map_err(|e| Error::Ranges(e.to_string()))?;
    let resources = doc
        .resources
        .into_iter()
        .map(|r| match (r.levels, r.min, r.max, r.step) {
            (Some(levels), None, None, None) => ResourceRange::levels(r.name, levels),
            (None, Some(min), Some(max), Some(step)) => {
                ResourceRange::stepped(r.name, min, max, step)
            }
            (None, Some(min), Some(max), None) => ResourceRange::levels(r.name, vec![min, max])
                .and_then(|lv| {
                    if min <= max {
                        Ok(lv)
                    } else {
                        Err(Error::Ranges(format!(
                            "{:?}: min {min} exceeds max {max}",
                            lv.name
                        )))
                    }
                }),
            _ => Err(Error::Ranges(format!(
                "{:?}: give either levels or min/max (with optional step)",
                r.name
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    RangeTable::new(resources)
}

pub fn load_ranges(path: impl AsRef<Path>) -> Result<RangeTable> {
    let path = path.as_ref();
    parse_ranges(&read_text(path)?).map_err(|e| format_err(path, e))
}

/// Writes every range as explicit levels.
pub fn ranges_to_json(table: &RangeTable) -> String {
    let doc = RangesDoc {
        resources: table
            .resources()
            .iter()
            .map(|r| RangeDoc {
                name: r.name.clone(),
                min: None,
                max: None,
                step: None,
                levels: Some(r.values().to_vec()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("ranges serialise")
}
