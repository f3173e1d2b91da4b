//! Ground-truth datasets drawn from a known multi-resource Amdahl model.
//!
//! Used as an oracle: data generated here lies exactly inside the model
//! class, so fitting must recover the fractions and cross-validation must be
//! (near) perfect when no noise is added.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::features::{FeatureTerm, ModelSpec};
use crate::ranges::{RangeTable, DEFAULT_GRID_CAP};
use crate::resources::ResourceVector;
use crate::speedup::{score_from_speedup, speedup_multi, FractionSet};

/// Noise on generated scores never pushes them outside `(1-0.5, 1+0.5)·s`.
pub const NOISE_TRUNCATION: f64 = 0.5;

/// A model with known fractions and a baseline score.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    spec: ModelSpec,
    fractions: FractionSet,
    baseline_perf: f64,
}

impl GroundTruth {
    pub fn new(spec: ModelSpec, fractions: FractionSet, baseline_perf: f64) -> Result<Self> {
        if !(baseline_perf > 0.0 && baseline_perf.is_finite()) {
            return Err(Error::Spec(format!(
                "baseline score must be positive, got {baseline_perf}"
            )));
        }
        let terms = spec.terms();
        if terms.len() != fractions.entries().len()
            || terms.iter().any(|t| fractions.get(t).is_none())
        {
            return Err(Error::Spec(
                "ground-truth fractions must be keyed exactly by the spec's terms".into(),
            ));
        }
        Ok(Self {
            spec,
            fractions,
            baseline_perf,
        })
    }

    /// Test fixture over [`RangeTable::xeon_default`]: serial 0.05, cores 0.55,
    /// core frequency 0.20, memory frequency 0.10, cores×memory frequency
    /// 0.10, baseline at the range minima scoring 10.
    pub fn fixture() -> Self {
        let ranges = RangeTable::xeon_default();
        let schema = ranges.schema().expect("valid ranges");
        let entries = vec![
            (FeatureTerm::single("cores"), 0.55),
            (FeatureTerm::single("core_freq_mhz"), 0.20),
            (FeatureTerm::single("mem_freq_mhz"), 0.10),
            (FeatureTerm::product("cores", "mem_freq_mhz"), 0.10),
        ];
        let terms = entries.iter().map(|(t, _)| t.clone()).collect();
        let baseline = ResourceVector::new(&schema, ranges.minima()).expect("positive minima");
        let spec = ModelSpec::new(schema, terms, baseline).expect("valid spec");
        let fractions = FractionSet::new(0.05, entries).expect("fractions sum to one");
        Self::new(spec, fractions, 10.0).expect("valid fixture")
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn fractions(&self) -> &FractionSet {
        &self.fractions
    }

    pub fn baseline_perf(&self) -> f64 {
        self.baseline_perf
    }

    /// Noiseless score of `config`.
    pub fn score(&self, config: &ResourceVector) -> Result<f64> {
        let s = speedup_multi(
            &self.fractions,
            self.spec.terms(),
            self.spec.schema(),
            self.spec.baseline(),
            config,
        )?;
        score_from_speedup(s.speedup, self.baseline_perf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    MultiplicativeGaussian,
}

/// Multiplicative score noise `score · (1 + ε)`, `ε ~ N(0, σ)` truncated to
/// `(-0.5, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            sigma: 0.0,
            seed: 0,
        }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Spec(format!(
                "noise sigma must be >= 0, got {sigma}"
            )));
        }
        Ok(Self {
            kind: NoiseKind::MultiplicativeGaussian,
            sigma,
            seed,
        })
    }

    fn is_silent(&self) -> bool {
        self.kind == NoiseKind::None || self.sigma == 0.0
    }

    /// Relative perturbation for row `index`. Each row draws from its own
    /// ChaCha stream, so the value depends only on `(seed, index)`.
    fn epsilon(&self, index: usize) -> f64 {
        if self.is_silent() {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let normal = Normal::new(0.0, self.sigma).expect("finite sigma");
        loop {
            let e: f64 = normal.sample(&mut rng);
            if e.abs() < NOISE_TRUNCATION {
                return e;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    RandomUniform,
    FullGrid,
}

/// Configurations drawn from `ranges`. Random mode picks each resource level
/// uniformly and independently; grid mode enumerates every combination in
/// lexicographic order and ignores `n`.
pub fn sample_configs(
    ranges: &RangeTable,
    n: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<Vec<ResourceVector>> {
    sample_configs_capped(ranges, n, seed, mode, DEFAULT_GRID_CAP)
}

pub fn sample_configs_capped(
    ranges: &RangeTable,
    n: usize,
    seed: u64,
    mode: SampleMode,
    cap: usize,
) -> Result<Vec<ResourceVector>> {
    let schema = ranges.schema()?;
    match mode {
        SampleMode::FullGrid => ranges
            .grid(cap)?
            .map(|v| ResourceVector::new(&schema, v))
            .collect(),
        SampleMode::RandomUniform => {
            if n == 0 {
                return Err(Error::Spec("sample size must be at least 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let v = ranges
                        .resources()
                        .iter()
                        .map(|r| r.values()[rng.random_range(0..r.values().len())])
                        .collect();
                    ResourceVector::new(&schema, v)
                })
                .collect()
        }
    }
}

/// Scores every configuration under `truth`, then applies `noise`.
pub fn generate(
    truth: &GroundTruth,
    configs: &[ResourceVector],
    noise: &NoiseSpec,
) -> Result<Dataset> {
    let rows = configs
        .iter()
        .enumerate()
        .map(|(i, config)| {
            let score = truth.score(config)? * (1.0 + noise.epsilon(i));
            Ok(Observation {
                config: config.clone(),
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(truth.spec.schema().clone(), rows, "synthetic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranges::ResourceRange;
    use crate::resources::ResourceSchema;

    #[test]
    fn full_grid_is_cartesian_product() {
        let t = RangeTable::new(vec![
            ResourceRange::levels("a", vec![1.0, 2.0]).unwrap(),
            ResourceRange::levels("b", vec![1.0, 2.0]).unwrap(),
        ])
        .unwrap();
        let c = sample_configs(&t, 1, 0, SampleMode::FullGrid).unwrap();
        let vals: Vec<&[f64]> = c.iter().map(|v| v.values()).collect();
        assert_eq!(
            vals,
            vec![&[1.0, 1.0][..], &[1.0, 2.0], &[2.0, 1.0], &[2.0, 2.0]]
        );
        assert!(sample_configs_capped(&t, 1, 0, SampleMode::FullGrid, 3).is_err());
    }

    #[test]
    fn random_sample_within_bounds_and_deterministic() {
        let t = RangeTable::xeon_default();
        let a = sample_configs(&t, 58, 7, SampleMode::RandomUniform).unwrap();
        let b = sample_configs(&t, 58, 7, SampleMode::RandomUniform).unwrap();
        assert_eq!(a.len(), 58);
        assert_eq!(a, b);
        assert!(a.iter().all(|c| t.contains(c)));
        let c = sample_configs(&t, 58, 8, SampleMode::RandomUniform).unwrap();
        assert_ne!(a, c);
        assert!(sample_configs(&t, 0, 7, SampleMode::RandomUniform).is_err());
    }

    #[test]
    fn baseline_scores_baseline_perf() {
        let truth = GroundTruth::fixture();
        let base = truth.spec().baseline().clone();
        let d = generate(&truth, &[base], &NoiseSpec::none()).unwrap();
        assert_eq!(d.observations()[0].score, 10.0);
    }

    #[test]
    fn composes_with_forward_model_example() {
        let s = ResourceSchema::new(["cores", "core_freq_mhz"]).unwrap();
        let cores = FeatureTerm::single("cores");
        let freq = FeatureTerm::single("core_freq_mhz");
        let spec = ModelSpec::new(
            s.clone(),
            vec![cores.clone(), freq.clone()],
            ResourceVector::new(&s, vec![1.0, 1000.0]).unwrap(),
        )
        .unwrap();
        let fr = FractionSet::new(0.3, vec![(cores, 0.4), (freq, 0.3)]).unwrap();
        let truth = GroundTruth::new(spec, fr, 100.0).unwrap();
        let cfg = ResourceVector::new(&s, vec![2.0, 4000.0]).unwrap();
        let d = generate(&truth, &[cfg], &NoiseSpec::none()).unwrap();
        assert!((d.observations()[0].score - 173.9130).abs() < 1e-4);
    }

    #[test]
    fn noise_is_reproducible_and_order_independent() {
        let truth = GroundTruth::fixture();
        let t = RangeTable::xeon_default();
        let configs = sample_configs(&t, 20, 3, SampleMode::RandomUniform).unwrap();
        let noise = NoiseSpec::gaussian(0.02, 11).unwrap();
        let a = generate(&truth, &configs, &noise).unwrap();
        let b = generate(&truth, &configs, &noise).unwrap();
        assert_eq!(a, b);
        // the tail of a longer run is unaffected by what precedes it
        let tail = generate(&truth, &configs[..5], &noise).unwrap();
        assert_eq!(&a.observations()[..5], tail.observations());
        let clean = generate(&truth, &configs, &NoiseSpec::none()).unwrap();
        assert_ne!(a, clean);
        for (n, c) in a.observations().iter().zip(clean.observations()) {
            let rel = n.score / c.score - 1.0;
            assert!(rel.abs() < NOISE_TRUNCATION);
        }
    }

    #[test]
    fn zero_sigma_behaves_like_no_noise() {
        let truth = GroundTruth::fixture();
        let configs = sample_configs(
            &RangeTable::xeon_default(),
            10,
            1,
            SampleMode::RandomUniform,
        )
        .unwrap();
        let a = generate(&truth, &configs, &NoiseSpec::gaussian(0.0, 5).unwrap()).unwrap();
        let b = generate(&truth, &configs, &NoiseSpec::none()).unwrap();
        assert_eq!(a, b);
        assert!(NoiseSpec::gaussian(-1.0, 0).is_err());
    }

    #[test]
    fn truth_rejects_mismatched_fractions() {
        let base = GroundTruth::fixture();
        let fr = FractionSet::new(0.5, vec![(FeatureTerm::single("cores"), 0.5)]).unwrap();
        assert!(GroundTruth::new(base.spec().clone(), fr, 1.0).is_err());
        assert!(GroundTruth::new(base.spec().clone(), base.fractions().clone(), 0.0).is_err());
    }
}
