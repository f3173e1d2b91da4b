//! Fitted-model documents (`amdahl-model/1`).
//!
//! Floats are written in shortest round-trip form and parsed with exact
//! rounding, so a reloaded model reproduces every prediction bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureTerm, ModelSpec};
use crate::regression::{FitWarning, FittedModel, Scaler};
use crate::resources::{ResourceSchema, ResourceVector};

pub const MODEL_FORMAT: &str = "amdahl-model/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format: String,
    resources: ResourceSchema,
    terms: Vec<FeatureTerm>,
    baseline: Vec<f64>,
    coefficients_raw: Vec<f64>,
    coefficients_scaled: Vec<f64>,
    scaler: Scaler,
    rank: usize,
    /// Absent when the estimate is not finite.
    condition: Option<f64>,
    training_mape: f64,
    #[serde(default)]
    warnings: Vec<FitWarning>,
}

pub fn model_to_json(model: &FittedModel) -> String {
    let spec = model.spec();
    let doc = ModelDoc {
        format: MODEL_FORMAT.to_string(),
        resources: spec.schema().clone(),
        terms: spec.terms().to_vec(),
        baseline: spec.baseline().values().to_vec(),
        coefficients_raw: model.coefficients_raw.clone(),
        coefficients_scaled: model.coefficients_scaled.clone(),
        scaler: model.scaler.clone(),
        rank: model.rank,
        condition: model.condition.is_finite().then_some(model.condition),
        training_mape: model.training_mape,
        warnings: model.warnings.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("model serialises")
}

pub fn model_from_json(text: &str) -> Result<FittedModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    if doc.format != MODEL_FORMAT {
        return Err(Error::Spec(format!(
            "unsupported model format {:?}, expected {MODEL_FORMAT:?}",
            doc.format
        )));
    }
    let baseline = ResourceVector::new(&doc.resources, doc.baseline)
        .map_err(|e| Error::Spec(format!("baseline: {e}")))?;
    let spec = ModelSpec::new(doc.resources, doc.terms, baseline)?;
    let p = spec.term_count() + 1;
    let k = p - 1;
    let lengths_ok = doc.coefficients_raw.len() == p
        && doc.coefficients_scaled.len() == p
        && doc.scaler.mean.len() == k
        && doc.scaler.std.len() == k
        && doc.scaler.degenerate.len() == k;
    if !lengths_ok {
        return Err(Error::Spec(format!(
            "coefficient or scaler lengths do not match {k} terms"
        )));
    }
    if doc.rank > p {
        return Err(Error::Spec(format!(
            "rank {} exceeds {p} columns",
            doc.rank
        )));
    }
    if doc.coefficients_raw.iter().any(|c| !c.is_finite()) {
        return Err(Error::Spec("non-finite coefficient".into()));
    }
    Ok(FittedModel {
        spec,
        coefficients_raw: doc.coefficients_raw,
        coefficients_scaled: doc.coefficients_scaled,
        scaler: doc.scaler,
        rank: doc.rank,
        condition: doc.condition.unwrap_or(f64::INFINITY),
        training_mape: doc.training_mape,
        warnings: doc.warnings,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FittedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_json(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
