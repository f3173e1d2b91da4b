//! Discrete per-resource level sets and the Cartesian grids they span.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resources::{ResourceSchema, ResourceVector};

/// Default upper bound on the number of points a full grid may enumerate.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

/// Allowed levels of one resource, ascending and distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRange {
    pub name: String,
    levels: Vec<f64>,
}

impl ResourceRange {
    /// Explicit levels; sorted and deduplicated.
    pub fn levels(name: impl Into<String>, levels: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let mut levels = levels;
        if levels.is_empty() {
            return Err(Error::Ranges(format!("{name:?} has no levels")));
        }
        if let Some(bad) = levels.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Ranges(format!(
                "{name:?} level {bad} is not positive"
            )));
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        Ok(Self { name, levels })
    }

    /// `min, min+step, ...` up to and including `max`.
    pub fn stepped(name: impl Into<String>, min: f64, max: f64, step: f64) -> Result<Self> {
        let name = name.into();
        if !(min > 0.0 && min.is_finite() && max.is_finite()) {
            return Err(Error::Ranges(format!(
                "{name:?}: min must be positive, got {min}"
            )));
        }
        if min > max {
            return Err(Error::Ranges(format!(
                "{name:?}: min {min} exceeds max {max}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Ranges(format!(
                "{name:?}: step must be positive, got {step}"
            )));
        }
        let span = (max - min) / step;
        if span > DEFAULT_GRID_CAP as f64 {
            return Err(Error::Ranges(format!("{name:?}: {span} steps is too many")));
        }
        let count = (span + 1e-9).floor() as usize;
        let mut levels: Vec<f64> = (0..=count).map(|i| min + i as f64 * step).collect();
        let last = levels.last_mut().expect("at least one level");
        if (max - *last).abs() <= 1e-9 * step {
            *last = max;
        } else {
            levels.push(max);
        }
        Self::levels(name, levels)
    }

    pub fn values(&self) -> &[f64] {
        &self.levels
    }

    pub fn min(&self) -> f64 {
        self.levels[0]
    }

    pub fn max(&self) -> f64 {
        *self.levels.last().expect("nonempty")
    }
}

/// Level sets for an ordered list of resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeTable {
    resources: Vec<ResourceRange>,
}

impl RangeTable {
    pub fn new(resources: Vec<ResourceRange>) -> Result<Self> {
        let table = Self { resources };
        table.schema()?;
        Ok(table)
    }

    /// Four resources varied in the first SPEC CPU experiment (Xeon 8180M):
    /// cores 1–28, core frequency 1800–2500 MHz, LLC 7–38 MB and memory
    /// frequency 2133–2667 MHz.
    pub fn xeon_default() -> Self {
        Self::new(vec![
            ResourceRange::stepped("cores", 1.0, 28.0, 1.0).unwrap(),
            ResourceRange::stepped("core_freq_mhz", 1800.0, 2500.0, 100.0).unwrap(),
            ResourceRange::stepped("llc_mb", 7.0, 38.0, 1.0).unwrap(),
            ResourceRange::levels("mem_freq_mhz", vec![2133.0, 2400.0, 2667.0]).unwrap(),
        ])
        .expect("valid default ranges")
    }

    pub fn resources(&self) -> &[ResourceRange] {
        &self.resources
    }

    pub fn schema(&self) -> Result<ResourceSchema> {
        ResourceSchema::new(self.resources.iter().map(|r| r.name.clone()))
            .map_err(|e| Error::Ranges(e.to_string()))
    }

    /// Per-resource minima.
    pub fn minima(&self) -> Vec<f64> {
        self.resources.iter().map(ResourceRange::min).collect()
    }

    /// Per-resource maxima.
    pub fn maxima(&self) -> Vec<f64> {
        self.resources.iter().map(ResourceRange::max).collect()
    }

    /// Product of level counts.
    pub fn grid_size(&self) -> u128 {
        self.resources
            .iter()
            .map(|r| r.levels.len() as u128)
            .product()
    }

    /// Same ranges reordered to follow `schema`; every schema resource must
    /// have a range. Extra ranges are dropped.
    pub fn project(&self, schema: &ResourceSchema) -> Result<RangeTable> {
        let resources = schema
            .names()
            .iter()
            .map(|n| {
                self.resources
                    .iter()
                    .find(|r| &r.name == n)
                    .cloned()
                    .ok_or_else(|| Error::Ranges(format!("no range given for resource {n:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        RangeTable::new(resources)
    }

    /// True when every value of `config` is one of the allowed levels.
    pub fn contains(&self, config: &ResourceVector) -> bool {
        config.len() == self.resources.len()
            && self
                .resources
                .iter()
                .zip(config.values())
                .all(|(r, v)| r.levels.contains(v))
    }

    /// Lexicographic enumeration (last resource varies fastest), refusing
    /// grids larger than `cap`.
    pub fn grid(&self, cap: usize) -> Result<GridIter<'_>> {
        let size = self.grid_size();
        if size > cap as u128 {
            return Err(Error::GridTooLarge { size, cap });
        }
        Ok(GridIter {
            table: self,
            index: vec![0; self.resources.len()],
            done: size == 0,
        })
    }
}

/// Odometer over a [`RangeTable`]'s level indices.
pub struct GridIter<'a> {
    table: &'a RangeTable,
    index: Vec<usize>,
    done: bool,
}

impl Iterator for GridIter<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let point = self
            .index
            .iter()
            .zip(&self.table.resources)
            .map(|(&i, r)| r.levels[i])
            .collect();
        let mut pos = self.index.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.index[pos] += 1;
            if self.index[pos] < self.table.resources[pos].levels.len() {
                break;
            }
            self.index[pos] = 0;
        }
        Some(point)
    }
}
