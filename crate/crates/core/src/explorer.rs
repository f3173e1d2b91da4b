//! Inverse queries: which configurations reach a target score, and at what
//! cost.
//!
//! The explorer evaluates a fitted model over every point of a discrete
//! grid, keeps points whose predicted score meets the target and ranks them
//! by a linear cost. Points where the model predicts a non-positive inverse
//! score are outside its region of validity; they are counted, never ranked.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranges::{RangeTable, DEFAULT_GRID_CAP};
use crate::regression::FittedModel;
use crate::resources::{ResourceSchema, ResourceVector};
use crate::validation::csv_field;

/// `cost(config) = offset + Σ_j weight_j · value_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl CostModel {
    /// Weights by resource name; resources not mentioned cost nothing.
    pub fn new<'a, I>(schema: &ResourceSchema, weights: I, offset: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut w = vec![0.0; schema.len()];
        for (name, weight) in weights {
            let idx = schema.index_of(name).ok_or_else(|| {
                Error::Argument(format!("cost weight for unknown resource {name:?}"))
            })?;
            if !weight.is_finite() {
                return Err(Error::Argument(format!(
                    "cost weight for {name:?} is not finite"
                )));
            }
            w[idx] = weight;
        }
        if !offset.is_finite() {
            return Err(Error::Argument("cost offset is not finite".into()));
        }
        Ok(Self { weights: w, offset })
    }

    pub fn cost(&self, values: &[f64]) -> f64 {
        self.offset
            + self
                .weights
                .iter()
                .zip(values)
                .map(|(w, v)| w * v)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasiblePoint {
    pub config: ResourceVector,
    pub predicted_score: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationResult {
    pub resources: Vec<String>,
    pub target_score: f64,
    /// Cheapest first; equal costs keep lexicographic configuration order.
    pub feasible: Vec<FeasiblePoint>,
    /// Feasible points before the `limit` cut.
    pub feasible_total: usize,
    pub evaluated: usize,
    pub infeasible: usize,
    /// Points where the model predicted a non-positive inverse score.
    pub errors: usize,
}

impl ExplorationResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for n in &self.resources {
            let _ = write!(out, "{},", csv_field(n));
        }
        out.push_str("predicted_score,cost\n");
        for p in &self.feasible {
            for v in p.config.values() {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{},{}", p.predicted_score, p.cost);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialises")
    }
}

pub fn explore(
    model: &FittedModel,
    ranges: &RangeTable,
    target_score: f64,
    cost: &CostModel,
    limit: usize,
) -> Result<ExplorationResult> {
    explore_capped(model, ranges, target_score, cost, limit, DEFAULT_GRID_CAP)
}

pub fn explore_capped(
    model: &FittedModel,
    ranges: &RangeTable,
    target_score: f64,
    cost: &CostModel,
    limit: usize,
    cap: usize,
) -> Result<ExplorationResult> {
    if !(target_score > 0.0 && target_score.is_finite()) {
        return Err(Error::Argument(format!(
            "target score must be positive, got {target_score}"
        )));
    }
    if limit == 0 {
        return Err(Error::Argument("limit must be at least 1".into()));
    }
    let schema = model.spec().schema();
    if cost.weights.len() != schema.len() {
        return Err(Error::Argument(format!(
            "cost model has {} weights, model has {} resources",
            cost.weights.len(),
            schema.len()
        )));
    }
    let ranges = ranges.project(schema)?;

    let mut scratch = model.feature_scratch();
    let (mut evaluated, mut infeasible, mut errors) = (0, 0, 0);
    let mut feasible = Vec::new();
    for values in ranges.grid(cap)? {
        evaluated += 1;
        let inv = model.inverse_unchecked(&values, &mut scratch);
        if !(inv > 0.0 && inv.is_finite()) {
            errors += 1;
            continue;
        }
        let score = 1.0 / inv;
        if score >= target_score {
            let c = cost.cost(&values);
            feasible.push(FeasiblePoint {
                config: ResourceVector::new(schema, values)?,
                predicted_score: score,
                cost: c,
            });
        } else {
            infeasible += 1;
        }
    }
    // Grid order is lexicographic, and the sort is stable.
    feasible.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    let feasible_total = feasible.len();
    feasible.truncate(limit);

    Ok(ExplorationResult {
        resources: schema.names().to_vec(),
        target_score,
        feasible,
        feasible_total,
        evaluated,
        infeasible,
        errors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub cost: f64,
    pub score: f64,
}

/// Cost/score staircase: each point beats every cheaper one.
pub fn frontier(result: &ExplorationResult) -> Vec<FrontierPoint> {
    frontier_of(result.feasible.iter().map(|p| (p.cost, p.predicted_score)))
}

/// Staircase over arbitrary `(cost, score)` pairs.
pub fn frontier_of<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Vec<FrontierPoint> {
    let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
    // highest score first within a cost, so later equal-cost points never win
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut out: Vec<FrontierPoint> = Vec::new();
    for (cost, score) in pts {
        if out.last().is_none_or(|best| score > best.score) {
            out.push(FrontierPoint { cost, score });
        }
    }
    out
}

pub fn frontier_csv(points: &[FrontierPoint]) -> String {
    let mut out = String::from("cost,best_score\n");
    for p in points {
        let _ = writeln!(out, "{},{}", p.cost, p.score);
    }
    out
}
