//! The aggregation engine: pool, design subsets, sweep projections.
//!
//! A sweep visits every subset once and replaces the subset's coordinates of
//! the working vector with their weighted projection onto the subset's
//! coherence polytope. Under the weighted Brier score every such step moves
//! the vector no further from any realizable truth vector, since those lie in
//! every local polytope.

mod design;
mod pool;
mod schedule;

pub use design::{design_subsets, DesignName, SubsetDesign};
pub use pool::{linear_average, pool, PooledEntry, PooledForecastSet};
pub use schedule::schedule_parallel;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EngineConfig, Method};
use crate::dykstra::{self, IndexedPolytope};
use crate::error::{Error, Result};
use crate::polytope::{build_polytope, distance_to, ProbVector};
use crate::scoring::weighted_brier;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepStats {
    pub sweep: usize,
    /// Largest absolute coordinate change over the sweep.
    pub max_move: f64,
    /// Largest distance from any subset's coordinates to its local polytope after the sweep.
    pub max_residual: f64,
    /// Weighted pooled Brier score `Σ N_j (q_j − t_j)²`, when truths are known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brier: Option<f64>,
    /// `brier / Σ N_j`: the mean over all original forecasts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brier_mean: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregationReport {
    pub design: DesignName,
    pub method: Method,
    pub events: Vec<String>,
    pub weights: Vec<usize>,
    pub input: Vec<f64>,
    #[serde(rename = "final")]
    pub final_probs: ProbVector,
    pub iterations_run: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_brier: Option<f64>,
    pub sweeps: Vec<SweepStats>,
    /// Working vector after each sweep, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterates: Option<Vec<Vec<f64>>>,
}

/// State after one subset update, handed to observers.
pub struct Step<'a> {
    pub sweep: usize,
    pub subset: usize,
    pub q: &'a [f64],
}

pub fn aggregate(
    pooled: &PooledForecastSet,
    design: &SubsetDesign,
    config: &EngineConfig,
) -> Result<AggregationReport> {
    aggregate_observed(pooled, design, config, |_| {})
}

/// [`aggregate`], calling `observer` after every individual projection.
pub fn aggregate_observed(
    pooled: &PooledForecastSet,
    design: &SubsetDesign,
    config: &EngineConfig,
    mut observer: impl FnMut(&Step<'_>),
) -> Result<AggregationReport> {
    if pooled.is_empty() {
        return Err(Error::NoForecasts);
    }
    if config.max_sweeps == 0 {
        return Err(Error::InvalidParameter(
            "max_sweeps must be at least 1".into(),
        ));
    }
    design.validate(pooled.len())?;

    let events = pooled.events();
    let weights = pooled.weights();
    let sets = design
        .subsets
        .iter()
        .map(|s| {
            let ev: Vec<_> = s.iter().map(|&i| events[i].clone()).collect();
            let w: Vec<f64> = s.iter().map(|&i| weights[i]).collect();
            IndexedPolytope::new(build_polytope(&ev, &w, config.support_cap)?, s.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    dykstra::validate(&sets, pooled.len())?;

    let batches: Vec<Vec<usize>> = if config.parallel {
        schedule_parallel(design)
    } else {
        (0..sets.len()).map(|j| vec![j]).collect()
    };
    let truths = pooled.truths();
    let total_weight: f64 = weights.iter().sum();
    let brier = |q: &[f64]| truths.as_ref().map(|t| weighted_brier(q, t, &weights));

    let input = pooled.means();
    let mut q = input.clone();
    let mut corrections: Vec<Vec<f64>> = match config.method {
        Method::Cyclic => Vec::new(),
        Method::Dykstra => sets.iter().map(|s| vec![0.0; s.indices.len()]).collect(),
    };
    let mut stats = Vec::new();
    let mut iterates = config.keep_iterates.then(Vec::new);
    let mut converged = false;

    for sweep in 1..=config.max_sweeps {
        let mut max_move = 0.0f64;
        for batch in &batches {
            let project = |&j: &usize| -> Result<(Vec<f64>, Vec<f64>)> {
                let set = &sets[j];
                let mut y: Vec<f64> = set.indices.iter().map(|&i| q[i]).collect();
                if let Some(c) = corrections.get(j) {
                    for (y, c) in y.iter_mut().zip(c) {
                        *y += c;
                    }
                }
                let p = set.polytope.project(&y)?.point.into_vec();
                Ok((p, y))
            };
            let results: Vec<Result<(Vec<f64>, Vec<f64>)>> = if config.parallel && batch.len() > 1 {
                batch.par_iter().map(project).collect()
            } else {
                batch.iter().map(project).collect()
            };
            for (&j, res) in batch.iter().zip(results) {
                let (p, y) = res?;
                for (k, &i) in sets[j].indices.iter().enumerate() {
                    max_move = max_move.max((p[k] - q[i]).abs());
                    q[i] = p[k];
                }
                if let Some(c) = corrections.get_mut(j) {
                    for ((c, y), p) in c.iter_mut().zip(&y).zip(&p) {
                        *c = y - p;
                    }
                }
                observer(&Step {
                    sweep,
                    subset: j,
                    q: &q,
                });
            }
        }

        let residual_of = |set: &IndexedPolytope| -> Result<f64> {
            let y: Vec<f64> = set.indices.iter().map(|&i| q[i]).collect();
            distance_to(&set.polytope, &y)
        };
        let residuals: Vec<f64> = if config.parallel {
            sets.par_iter().map(residual_of).collect::<Result<_>>()?
        } else {
            sets.iter().map(residual_of).collect::<Result<_>>()?
        };
        let max_residual = residuals.into_iter().fold(0.0f64, f64::max);
        let b = brier(&q);
        stats.push(SweepStats {
            sweep,
            max_move,
            max_residual,
            brier: b,
            brier_mean: b.map(|b| b / total_weight),
        });
        if let Some(it) = iterates.as_mut() {
            it.push(q.clone());
        }
        if max_move <= config.tol {
            converged = true;
            break;
        }
    }

    Ok(AggregationReport {
        design: design.name,
        method: config.method,
        events: events.iter().map(|e| e.to_string()).collect(),
        weights: pooled.entries().iter().map(|e| e.weight).collect(),
        input: input.clone(),
        final_probs: ProbVector::new(q)?,
        iterations_run: stats.len(),
        converged,
        initial_brier: brier(&input),
        sweeps: stats,
        iterates,
    })
}
