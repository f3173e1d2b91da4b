//! Five-fold cross-validation scored by MAPE in the score domain.
//!
//! Rows are shuffled with a seeded ChaCha8 generator, then dealt into five
//! contiguous blocks whose sizes differ by at most one. Each block serves
//! once as the validation fold for a model fitted (scaler included) on the
//! other four. Accuracy is reported as `100 - MAPE`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::ModelSpec;
use crate::regression::{fit_dataset, predict_score};

pub const FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub n: usize,
    /// Validation fold of each row.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Row indices of fold `fold`, ascending.
    pub fn validation_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn training_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> [usize; FOLDS] {
        let mut sizes = [0; FOLDS];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Deterministic five-way partition of `n` rows.
pub fn make_folds(n: usize, seed: u64) -> Result<FoldPlan> {
    if n < FOLDS {
        return Err(Error::Spec(format!(
            "{FOLDS}-fold cross-validation needs at least {FOLDS} rows, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / FOLDS, n % FOLDS);
    let mut assignments = vec![0; n];
    let mut pos = 0;
    for fold in 0..FOLDS {
        let size = base + usize::from(fold < extra);
        for &row in &order[pos..pos + size] {
            assignments[row] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan {
        seed,
        n,
        assignments,
    })
}

/// Mean absolute percentage error, `100 · mean |a - p| / a`.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::domain(format!(
            "{} actual values but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::domain("MAPE of zero values"));
    }
    let mut total = 0.0;
    for (i, (&a, &p)) in actual.iter().zip(predicted).enumerate() {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!(
                "actual value {i} is {a}, must be positive"
            )));
        }
        total += ((a - p) / a).abs();
    }
    Ok(100.0 * total / actual.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub mape: f64,
    pub accuracy: f64,
    /// Validation rows whose prediction was not positive; each counted as a
    /// 100% error.
    pub failed_rows: Vec<usize>,
    /// `(row, predicted score)` for every validation row; `None` marks a
    /// failed prediction.
    #[serde(skip)]
    predictions: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub label: String,
    pub seed: u64,
    pub n: usize,
    pub folds: Vec<FoldResult>,
    pub mean_mape: f64,
    pub accuracy: f64,
    pub assignments: Vec<usize>,
    /// Out-of-fold predicted score of each row, `None` where the model
    /// predicted a non-positive inverse score.
    pub predicted: Vec<Option<f64>>,
}

impl CvReport {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn failed_rows(&self) -> usize {
        self.folds.iter().map(|f| f.failed_rows.len()).sum()
    }

    /// Aligned plain-text table: fold, n_valid, MAPE%, accuracy%.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "model: {}  rows: {}  seed: {}",
            self.label, self.n, self.seed
        );
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>10} {:>10}",
            "fold", "n_valid", "MAPE%", "accuracy%"
        );
        for f in &self.folds {
            let _ = writeln!(
                out,
                "{:>6} {:>8} {:>10.4} {:>10.4}",
                f.fold, f.n_valid, f.mape, f.accuracy
            );
        }
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>10.4} {:>10.4}",
            "mean", self.n, self.mean_mape, self.accuracy
        );
        let failed = self.failed_rows();
        if failed > 0 {
            let _ = writeln!(
                out,
                "warning: {failed} validation rows had non-positive predictions"
            );
        }
        out
    }

    /// Machine-readable form.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Header of [`summary_csv`].
pub fn summary_header() -> String {
    let mut h = String::from("model,n,seed,mean_mape,accuracy");
    for f in 0..FOLDS {
        let _ = write!(h, ",fold{f}_mape");
    }
    h.push_str(",failed_rows");
    h
}

/// One row per report: label, size, seed, mean MAPE, accuracy, per-fold MAPE.
pub fn summary_csv(reports: &[CvReport]) -> String {
    let mut out = summary_header();
    out.push('\n');
    for r in reports {
        let _ = write!(
            out,
            "{},{},{},{:.6},{:.6}",
            csv_field(&r.label),
            r.n,
            r.seed,
            r.mean_mape,
            r.accuracy
        );
        for f in &r.folds {
            let _ = write!(out, ",{:.6}", f.mape);
        }
        let _ = writeln!(out, ",{}", r.failed_rows());
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Cross-validates `spec` on `data` with the fold plan for `seed`.
pub fn cross_validate(spec: &ModelSpec, data: &Dataset, seed: u64) -> Result<CvReport> {
    let data = data.project(spec.schema())?;
    let plan = make_folds(data.len(), seed)?;
    let folds = (0..FOLDS)
        .map(|fold| {
            run_fold(spec, &data, &plan, fold).map_err(|e| Error::Fold {
                fold,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut predicted = vec![None; data.len()];
    for f in &folds {
        for &(row, p) in &f.predictions {
            predicted[row] = p;
        }
    }
    let mean_mape = folds.iter().map(|f| f.mape).sum::<f64>() / FOLDS as f64;
    Ok(CvReport {
        label: data.source().to_string(),
        seed,
        n: data.len(),
        folds,
        mean_mape,
        accuracy: 100.0 - mean_mape,
        assignments: plan.assignments,
        predicted,
    })
}

fn run_fold(spec: &ModelSpec, data: &Dataset, plan: &FoldPlan, fold: usize) -> Result<FoldResult> {
    let train_rows = plan.training_rows(fold);
    let valid_rows = plan.validation_rows(fold);
    let model = fit_dataset(spec, &data.subset(&train_rows))?;

    let mut actual = Vec::with_capacity(valid_rows.len());
    let mut predicted = Vec::with_capacity(valid_rows.len());
    let mut failed_rows = Vec::new();
    let mut predictions = Vec::with_capacity(valid_rows.len());
    for &row in &valid_rows {
        let obs = &data.observations()[row];
        actual.push(obs.score);
        match predict_score(&model, &obs.config) {
            Ok(p) => {
                predicted.push(p);
                predictions.push((row, Some(p)));
            }
            Err(Error::NonPositivePrediction { .. }) => {
                // |a - 0| / a = 1, i.e. a 100% error for this row
                failed_rows.push(row);
                predicted.push(0.0);
                predictions.push((row, None));
            }
            Err(e) => return Err(e),
        }
    }
    let mape = mape(&actual, &predicted)?;
    Ok(FoldResult {
        fold,
        n_train: train_rows.len(),
        n_valid: valid_rows.len(),
        mape,
        accuracy: 100.0 - mape,
        failed_rows,
        predictions,
    })
}
