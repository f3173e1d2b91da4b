//! Forward Amdahl model over one or many resources.
//!
//! A program splits into a serial part and mutually exclusive parallel
//! fractions, each accelerated by one feature term's enhancement. The
//! speedup of a test configuration over the baseline is
//!
//! ```text
//! S = 1 / (serial + Σ_t f_t · ratio_t(base, test))
//! ```
//!
//! where `ratio_t` is the term's monomial at the baseline divided by its value
//! at the test configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureTerm;
use crate::resources::{ResourceSchema, ResourceVector};

const SUM_TOLERANCE: f64 = 1e-12;

/// Serial remainder and per-term parallel fractions of a ground-truth
/// program. Every fraction lies in `[0, 1]` and all of them sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionSet {
    serial: f64,
    entries: Vec<(FeatureTerm, f64)>,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "fraction {name} = {v} is outside [0, 1]"
        )))
    }
}

impl FractionSet {
    pub fn new(serial: f64, entries: Vec<(FeatureTerm, f64)>) -> Result<Self> {
        check_unit("serial", serial)?;
        for (i, (term, f)) in entries.iter().enumerate() {
            check_unit(term.label(), *f)?;
            if entries[..i].iter().any(|(t, _)| t == term) {
                return Err(Error::domain(format!("fraction for {term} given twice")));
            }
        }
        let total = serial + entries.iter().map(|(_, f)| f).sum::<f64>();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!(
                "fractions sum to {total}, expected 1"
            )));
        }
        Ok(Self { serial, entries })
    }

    /// Serial fraction taken as the remainder `1 - Σ f_t`.
    pub fn with_serial_remainder(entries: Vec<(FeatureTerm, f64)>) -> Result<Self> {
        let serial = 1.0 - entries.iter().map(|(_, f)| f).sum::<f64>();
        Self::new(serial, entries)
    }

    pub fn serial(&self) -> f64 {
        self.serial
    }

    pub fn entries(&self) -> &[(FeatureTerm, f64)] {
        &self.entries
    }

    pub fn get(&self, term: &FeatureTerm) -> Option<f64> {
        self.entries
            .iter()
            .find(|(t, _)| t == term)
            .map(|(_, f)| *f)
    }

    /// The terms, in the order the fractions were given.
    pub fn terms(&self) -> Vec<FeatureTerm> {
        self.entries.iter().map(|(t, _)| t.clone()).collect()
    }
}

/// `speedup = 1 / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupResult {
    pub speedup: f64,
    pub denominator: f64,
}

impl SpeedupResult {
    fn from_denominator(denominator: f64) -> Result<Self> {
        if !(denominator > 0.0 && denominator.is_finite()) {
            return Err(Error::domain(format!(
                "speedup denominator {denominator} is not positive"
            )));
        }
        Ok(Self {
            speedup: 1.0 / denominator,
            denominator,
        })
    }
}

/// Classic single-resource Amdahl speedup.
pub fn speedup_single(fraction: f64, r_base: f64, r_test: f64) -> Result<SpeedupResult> {
    check_unit("f", fraction)?;
    for (name, r) in [("r_base", r_base), ("r_test", r_test)] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("{name} must be positive, got {r}")));
        }
    }
    SpeedupResult::from_denominator((1.0 - fraction) + fraction * (r_base / r_test))
}

/// Multi-resource speedup with the fraction set keyed exactly by `terms`.
pub fn speedup_multi(
    fractions: &FractionSet,
    terms: &[FeatureTerm],
    schema: &ResourceSchema,
    base: &ResourceVector,
    test: &ResourceVector,
) -> Result<SpeedupResult> {
    if terms.len() != fractions.entries().len() {
        return Err(Error::domain(format!(
            "{} terms but {} fractions",
            terms.len(),
            fractions.entries().len()
        )));
    }
    let mut denominator = fractions.serial();
    for term in terms {
        let f = fractions
            .get(term)
            .ok_or_else(|| Error::domain(format!("no fraction for term {term}")))?;
        denominator += f * term.ratio(schema, base, test)?;
    }
    SpeedupResult::from_denominator(denominator)
}

/// Test-configuration score implied by a speedup over the baseline score.
pub fn score_from_speedup(speedup: f64, baseline_perf: f64) -> Result<f64> {
    for (name, v) in [("speedup", speedup), ("baseline score", baseline_perf)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(baseline_perf * speedup)
}
