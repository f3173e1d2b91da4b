//! Ordinary least squares on the reciprocal-transformed design.
//!
//! With `y = 1/score` and features equal to enhancement ratios, the
//! multi-resource Amdahl model is linear: `y = Σ_k α_k X_k`. The intercept
//! `α_0` carries the serial part and each `α_t` a parallel fraction, all
//! scaled by the inverse baseline score. Coefficients are fitted
//! unconstrained; [`extract_fractions`] reports whether they describe a
//! physically meaningful program.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::{build_design, DesignMatrix, FeatureTerm, ModelSpec};
use crate::linalg::{dot, lstsq, Matrix};
use crate::resources::ResourceVector;

/// Columns whose standard deviation falls below this are left unscaled.
pub const DEGENERATE_STD: f64 = 1e-12;

/// Fraction estimates within `[-ε, 1+ε]` count as physically valid.
pub const FRACTION_SLACK: f64 = 0.05;

/// Per-column z-score normalisation of the non-intercept features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub fitted_on: usize,
}

impl Scaler {
    /// Statistics of columns `1..` of `x`. Population standard deviation.
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows();
        let cols = x.cols().saturating_sub(1);
        let mut mean = vec![0.0; cols];
        let mut std = vec![0.0; cols];
        for j in 0..cols {
            let m = x.column(j + 1).sum::<f64>() / n as f64;
            let var = x.column(j + 1).map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
            mean[j] = m;
            std[j] = var.sqrt();
        }
        let degenerate = std.iter().map(|&s| s < DEGENERATE_STD).collect();
        Self {
            mean,
            std,
            degenerate,
            fitted_on: n,
        }
    }

    /// No-op scaler: zero shift, unit scale.
    pub fn identity(cols: usize, fitted_on: usize) -> Self {
        Self {
            mean: vec![0.0; cols],
            std: vec![1.0; cols],
            degenerate: vec![false; cols],
            fitted_on,
        }
    }

    #[inline]
    fn scale(&self, j: usize) -> f64 {
        if self.degenerate[j] {
            1.0
        } else {
            self.std[j]
        }
    }

    fn transform_row(&self, row: &[f64], out: &mut [f64]) {
        out[0] = row[0];
        for j in 0..self.mean.len() {
            out[j + 1] = (row[j + 1] - self.mean[j]) / self.scale(j);
        }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for r in 0..x.rows() {
            self.transform_row(x.row(r), out.row_mut(r));
        }
        out
    }

    pub fn inverse_transform(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for r in 0..x.rows() {
            let (src, dst) = (x.row(r), out.row_mut(r));
            dst[0] = src[0];
            for j in 0..self.mean.len() {
                dst[j + 1] = src[j + 1] * self.scale(j) + self.mean[j];
            }
        }
        out
    }

    /// Maps coefficients solved on the scaled design back to raw ratio space.
    pub fn unscale_coefficients(&self, scaled: &[f64]) -> Vec<f64> {
        let mut raw = vec![0.0; scaled.len()];
        let mut intercept = scaled[0];
        for j in 0..self.mean.len() {
            raw[j + 1] = scaled[j + 1] / self.scale(j);
            intercept -= raw[j + 1] * self.mean[j];
        }
        raw[0] = intercept;
        raw
    }
}

/// Non-fatal fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    /// A feature column is constant over the training rows, so its resource
    /// effect cannot be separated from the intercept.
    DegenerateColumn {
        column: String,
    },
    RankDeficient {
        rank: usize,
        columns: usize,
    },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::DegenerateColumn { column } => write!(
                f,
                "feature column {column:?} is constant over the training rows; \
                 the data cannot reveal its effect"
            ),
            FitWarning::RankDeficient { rank, columns } => write!(
                f,
                "design has rank {rank} < {columns} columns; using the minimum-norm solution"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// z-score the feature columns before solving.
    pub normalize: bool,
    /// Relative pivot threshold for the rank decision; `None` = `max(n, p)·ε`.
    pub rcond: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            normalize: true,
            rcond: None,
        }
    }
}

/// A trained model: spec plus coefficients and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub(crate) spec: ModelSpec,
    pub(crate) coefficients_raw: Vec<f64>,
    pub(crate) coefficients_scaled: Vec<f64>,
    pub(crate) scaler: Scaler,
    pub(crate) rank: usize,
    pub(crate) condition: f64,
    pub(crate) training_mape: f64,
    pub(crate) warnings: Vec<FitWarning>,
}

impl FittedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// `α` in unscaled ratio space, intercept first.
    pub fn coefficients_raw(&self) -> &[f64] {
        &self.coefficients_raw
    }

    pub fn coefficients_scaled(&self) -> &[f64] {
        &self.coefficients_scaled
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// MAPE (percent) on the training rows, score domain.
    pub fn training_mape(&self) -> f64 {
        self.training_mape
    }

    pub fn warnings(&self) -> &[FitWarning] {
        &self.warnings
    }

    /// `Ŷ` for raw configuration values, using `scratch` for the feature row.
    /// No positivity check.
    #[inline]
    pub(crate) fn inverse_unchecked(&self, values: &[f64], scratch: &mut [f64]) -> f64 {
        self.spec.fill_features(values, scratch);
        dot(scratch, &self.coefficients_raw)
    }

    pub(crate) fn feature_scratch(&self) -> Vec<f64> {
        vec![0.0; self.coefficients_raw.len()]
    }

    /// `Ŷ` evaluated through the scaled coefficients and the scaler.
    pub fn predict_inverse_scaled(&self, config: &ResourceVector) -> Result<f64> {
        let row = self.spec.features(config)?;
        let mut scaled = vec![0.0; row.len()];
        self.scaler.transform_row(&row, &mut scaled);
        Ok(dot(&scaled, &self.coefficients_scaled))
    }
}

/// Fits `design` (built from `spec`) with default options.
pub fn fit(spec: &ModelSpec, design: &DesignMatrix) -> Result<FittedModel> {
    fit_with(spec, design, FitOptions::default())
}

/// Builds the design for `data` and fits it.
pub fn fit_dataset(spec: &ModelSpec, data: &Dataset) -> Result<FittedModel> {
    fit(spec, &build_design(spec, data)?)
}

pub fn fit_with(spec: &ModelSpec, design: &DesignMatrix, opts: FitOptions) -> Result<FittedModel> {
    let (n, p) = (design.rows(), design.cols());
    if n == 0 {
        return Err(Error::EmptyDesign);
    }
    if p != spec.term_count() + 1 || design.y.len() != n {
        return Err(Error::Spec(format!(
            "design is {n}x{p} with {} targets; spec expects {} columns",
            design.y.len(),
            spec.term_count() + 1
        )));
    }
    for r in 0..n {
        if design.x.row(r).iter().any(|v| !v.is_finite()) || !design.y[r].is_finite() {
            return Err(Error::Design {
                row: r,
                message: "non-finite entry in design".into(),
            });
        }
    }

    let scaler = if opts.normalize {
        Scaler::fit(&design.x)
    } else {
        Scaler::identity(p - 1, n)
    };
    let scaled_x = scaler.transform(&design.x);
    let sol = lstsq(&scaled_x, &design.y, opts.rcond);
    let coefficients_raw = scaler.unscale_coefficients(&sol.coefficients);

    let mut warnings: Vec<FitWarning> = Vec::new();
    let raw_sd = if opts.normalize {
        scaler.std.clone()
    } else {
        Scaler::fit(&design.x).std
    };
    for (j, sd) in raw_sd.iter().enumerate() {
        if *sd < DEGENERATE_STD {
            warnings.push(FitWarning::DegenerateColumn {
                column: design.labels[j + 1].clone(),
            });
        }
    }
    if sol.rank < p {
        warnings.push(FitWarning::RankDeficient {
            rank: sol.rank,
            columns: p,
        });
    }

    let training_mape = training_mape(&design.x, &design.y, &coefficients_raw);
    Ok(FittedModel {
        spec: spec.clone(),
        coefficients_raw,
        coefficients_scaled: sol.coefficients,
        scaler,
        rank: sol.rank,
        condition: sol.condition,
        training_mape,
        warnings,
    })
}

fn training_mape(x: &Matrix, y: &[f64], alpha: &[f64]) -> f64 {
    let total: f64 = (0..x.rows())
        .map(|r| {
            let actual = 1.0 / y[r];
            let inv = dot(x.row(r), alpha);
            if inv > 0.0 {
                ((actual - 1.0 / inv) / actual).abs()
            } else {
                1.0
            }
        })
        .sum();
    100.0 * total / x.rows() as f64
}

/// Predicted inverse score `Ŷ = Σ α_k X_k` at `config`.
pub fn predict_inverse(model: &FittedModel, config: &ResourceVector) -> Result<f64> {
    config.conforms_to(model.spec.schema())?;
    let mut scratch = model.feature_scratch();
    let y = model.inverse_unchecked(config.values(), &mut scratch);
    if y > 0.0 && y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonPositivePrediction {
            value: y,
            config: model.spec.schema().describe(config),
        })
    }
}

/// Predicted score `1 / Ŷ` at `config`.
pub fn predict_score(model: &FittedModel, config: &ResourceVector) -> Result<f64> {
    predict_inverse(model, config).map(|y| 1.0 / y)
}

/// Amdahl fractions implied by a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionEstimate {
    pub serial: f64,
    pub fractions: Vec<(FeatureTerm, f64)>,
    pub valid: bool,
}

/// Normalises coefficients by their sum: `serial = α_0/Σα`,
/// `fraction_t = α_t/Σα`.
pub fn extract_fractions(model: &FittedModel) -> Result<FractionEstimate> {
    fractions_from_coefficients(model.spec.terms(), &model.coefficients_raw)
}

pub fn fractions_from_coefficients(
    terms: &[FeatureTerm],
    alpha: &[f64],
) -> Result<FractionEstimate> {
    assert_eq!(alpha.len(), terms.len() + 1);
    let total: f64 = alpha.iter().sum();
    if total.is_nan() || total.abs() <= 1e-12 {
        return Err(Error::DegenerateCoefficients(total));
    }
    let serial = alpha[0] / total;
    let fractions: Vec<(FeatureTerm, f64)> = terms
        .iter()
        .cloned()
        .zip(alpha[1..].iter().map(|a| a / total))
        .collect();
    let in_range = |f: f64| (-FRACTION_SLACK..=1.0 + FRACTION_SLACK).contains(&f);
    let valid = in_range(serial) && fractions.iter().all(|(_, f)| in_range(*f));
    Ok(FractionEstimate {
        serial,
        fractions,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Observation;
    use crate::features::standard_terms;
    use crate::resources::ResourceSchema;
    use proptest::prelude::*;

    fn schema() -> ResourceSchema {
        ResourceSchema::new(["a", "b"]).unwrap()
    }

    fn spec_ab(base: [f64; 2]) -> ModelSpec {
        let s = schema();
        ModelSpec::new(
            s.clone(),
            standard_terms(&s, true, &[]).unwrap(),
            ResourceVector::new(&s, base.to_vec()).unwrap(),
        )
        .unwrap()
    }

    /// Scores from α* = [0.2, 0.3, 0.1, 0.4] over a small grid at baseline (1, 1).
    fn exact_data() -> (Dataset, Vec<f64>) {
        let s = schema();
        let alpha = vec![0.2, 0.3, 0.1, 0.4];
        let mut rows = Vec::new();
        for a in [1.0, 2.0, 3.0, 5.0] {
            for b in [1.0, 1.5, 4.0] {
                let y = alpha[0] + alpha[1] / a + alpha[2] / b + alpha[3] / (a * b);
                rows.push(Observation {
                    config: ResourceVector::new(&s, vec![a, b]).unwrap(),
                    score: 1.0 / y,
                });
            }
        }
        (Dataset::new(s, rows, "exact").unwrap(), alpha)
    }

    #[test]
    fn recovers_exact_coefficients() {
        let (data, alpha) = exact_data();
        let model = fit_dataset(&spec_ab([1.0, 1.0]), &data).unwrap();
        for (got, want) in model.coefficients_raw().iter().zip(&alpha) {
            assert!((got - want).abs() <= 1e-9 * want.abs(), "{got} vs {want}");
        }
        assert_eq!(model.rank(), 4);
        assert!(model.warnings().is_empty());
        assert!(model.training_mape() < 1e-9);
        assert!(model.condition() >= 1.0);
    }

    #[test]
    fn baseline_prediction_is_coefficient_sum() {
        let (data, alpha) = exact_data();
        let spec = spec_ab([1.0, 1.0]);
        let model = fit_dataset(&spec, &data).unwrap();
        let y = predict_inverse(&model, spec.baseline()).unwrap();
        let sum: f64 = model.coefficients_raw().iter().sum();
        assert!((y - sum).abs() < 1e-15);
        assert!((y - alpha.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn predicting_a_training_row_interpolates() {
        let (data, _) = exact_data();
        let model = fit_dataset(&spec_ab([1.0, 1.0]), &data).unwrap();
        for obs in data.observations() {
            let y = predict_inverse(&model, &obs.config).unwrap();
            assert!((y - 1.0 / obs.score).abs() <= 1e-9 / obs.score);
            let s = predict_score(&model, &obs.config).unwrap();
            assert!((s - obs.score).abs() <= 1e-9 * obs.score);
        }
    }

    #[test]
    fn constant_column_warns_and_still_fits() {
        let s = schema();
        let rows = [(1.0, 50.0), (2.0, 80.0), (4.0, 120.0), (8.0, 150.0)]
            .iter()
            .map(|&(a, score)| Observation {
                config: ResourceVector::new(&s, vec![a, 3.0]).unwrap(),
                score,
            })
            .collect();
        let data = Dataset::new(s.clone(), rows, "const").unwrap();
        let spec = ModelSpec::new(
            s.clone(),
            standard_terms(&s, false, &[]).unwrap(),
            ResourceVector::new(&s, vec![1.0, 3.0]).unwrap(),
        )
        .unwrap();
        let model = fit_dataset(&spec, &data).unwrap();
        assert_eq!(model.rank(), 2);
        assert!(model
            .warnings()
            .contains(&FitWarning::DegenerateColumn { column: "b".into() }));
        assert!(model.warnings().iter().any(|w| matches!(
            w,
            FitWarning::RankDeficient {
                rank: 2,
                columns: 3
            }
        )));
        assert!(model.warnings()[0].to_string().contains("\"b\""));
        assert_eq!(model.coefficients_raw()[2], 0.0);
    }

    #[test]
    fn empty_design_is_an_error() {
        let spec = spec_ab([1.0, 1.0]);
        let design = DesignMatrix {
            x: Matrix::zeros(0, 4),
            y: vec![],
            labels: spec.column_labels(),
        };
        assert!(matches!(fit(&spec, &design), Err(Error::EmptyDesign)));
    }

    #[test]
    fn nonpositive_prediction_is_an_error() {
        let (data, _) = exact_data();
        let mut model = fit_dataset(&spec_ab([1.0, 1.0]), &data).unwrap();
        model.coefficients_raw = vec![-1.0, 0.0, 0.0, 0.0];
        let cfg = ResourceVector::new(&schema(), vec![2.0, 2.0]).unwrap();
        let err = predict_score(&model, &cfg).unwrap_err();
        assert!(err.is_numerical());
        assert!(err.to_string().contains("a=2, b=2"), "{err}");
    }

    #[test]
    fn fraction_extraction_examples() {
        let terms = [FeatureTerm::single("a"), FeatureTerm::single("b")];
        let est = fractions_from_coefficients(&terms, &[0.3 * 7.0, 0.4 * 7.0, 0.3 * 7.0]).unwrap();
        assert!((est.serial - 0.3).abs() < 1e-15);
        assert!((est.fractions[0].1 - 0.4).abs() < 1e-15);
        assert!((est.fractions[1].1 - 0.3).abs() < 1e-15);
        assert!(est.valid);

        let est = fractions_from_coefficients(&terms, &[1.0, -5.0, 6.0]).unwrap();
        assert!(!est.valid);
        assert_eq!(est.fractions.len(), 2);

        assert!(matches!(
            fractions_from_coefficients(&terms, &[1.0, -1.0, 0.0]),
            Err(Error::DegenerateCoefficients(_))
        ));
    }

    #[test]
    fn scaler_round_trip() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 7.0], [1.0, 4.0, 7.0], [1.0, 9.0, 7.0]]);
        let sc = Scaler::fit(&x);
        assert_eq!(sc.degenerate, vec![false, true]);
        let back = sc.inverse_transform(&sc.transform(&x));
        for r in 0..3 {
            for c in 0..3 {
                assert!((back.get(r, c) - x.get(r, c)).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn fractions_are_scale_invariant(
            alpha in proptest::collection::vec(0.01f64..2.0, 3),
            c in 1e-6f64..1e6,
        ) {
            let terms = [FeatureTerm::single("a"), FeatureTerm::single("b")];
            let scaled: Vec<f64> = alpha.iter().map(|a| a * c).collect();
            let e1 = fractions_from_coefficients(&terms, &alpha).unwrap();
            let e2 = fractions_from_coefficients(&terms, &scaled).unwrap();
            prop_assert!((e1.serial - e2.serial).abs() < 1e-12);
            for (a, b) in e1.fractions.iter().zip(&e2.fractions) {
                prop_assert!((a.1 - b.1).abs() < 1e-12);
            }
            let sum = e1.serial + e1.fractions.iter().map(|f| f.1).sum::<f64>();
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }
    }
}
