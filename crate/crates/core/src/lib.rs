//! Multi-resource Amdahl's-law performance models.
//!
//! Benchmark scores measured across system configurations (cores,
//! frequencies, cache, memory channels, SMT) are modelled with an extension
//! of Amdahl's law in which every resource, every pairwise interaction and
//! any engineered monomial accelerates its own fraction of the program.
//! Taking reciprocals turns that law into a linear model, which is fitted by
//! least squares, checked by five-fold cross-validation, and then used to
//! predict scores or to search a configuration grid for cheap designs that
//! meet a performance target.
//!
//! ```
//! use amdahl_core::prelude::*;
//!
//! let truth = GroundTruth::fixture();
//! let ranges = RangeTable::xeon_default();
//! let configs = sample_configs(&ranges, 58, 1, SampleMode::RandomUniform).unwrap();
//! let data = generate(&truth, &configs, &NoiseSpec::none()).unwrap();
//!
//! let model = fit_dataset(truth.spec(), &data).unwrap();
//! let est = extract_fractions(&model).unwrap();
//! assert!((est.serial - 0.05).abs() < 1e-6);
//!
//! let report = cross_validate(truth.spec(), &data, 7).unwrap();
//! assert!(report.mean_mape < 1e-4);
//! ```

pub mod dataset;
pub mod error;
pub mod explorer;
pub mod features;
pub mod linalg;
pub mod persist;
pub mod ranges;
pub mod regression;
pub mod resources;
pub mod specfile;
pub mod speedup;
pub mod synthetic;
pub mod validation;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dataset::{load_dataset, Dataset, Observation};
    pub use crate::error::{Error, Result};
    pub use crate::explorer::{explore, frontier, CostModel, ExplorationResult};
    pub use crate::features::{
        build_design, standard_terms, term_ratio, DesignMatrix, FeatureTerm, ModelSpec,
    };
    pub use crate::persist::{load_model, model_from_json, model_to_json};
    pub use crate::ranges::{RangeTable, ResourceRange};
    pub use crate::regression::{
        extract_fractions, fit, fit_dataset, predict_inverse, predict_score, FittedModel,
        FractionEstimate,
    };
    pub use crate::resources::{ResourceSchema, ResourceVector};
    pub use crate::specfile::{load_model_spec, SpecDraft};
    pub use crate::speedup::{
        score_from_speedup, speedup_multi, speedup_single, FractionSet, SpeedupResult,
    };
    pub use crate::synthetic::{generate, sample_configs, GroundTruth, NoiseSpec, SampleMode};
    pub use crate::validation::{cross_validate, make_folds, mape, CvReport, FoldPlan};
}
