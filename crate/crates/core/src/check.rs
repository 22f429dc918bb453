//! Coherence diagnostics for a forecast file.

use std::collections::HashMap;

use serde::Serialize;

use crate::config::{Strategy, MEMBERSHIP_TOL};
use crate::engine::{design_subsets, pool, PooledForecastSet};
use crate::error::Result;
use crate::event::Connective;
use crate::forecast::Forecast;
use crate::polytope::{build_polytope, distance_to};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetResidual {
    pub events: Vec<String>,
    /// Euclidean distance from the subset's forecasts to its coherence polytope.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherenceCheck {
    pub subsets: Vec<SubsetResidual>,
    pub max_residual: f64,
    pub coherent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JudgeCheck {
    pub judge: String,
    #[serde(flatten)]
    pub check: CoherenceCheck,
}

/// A conjunction given more probability than one of its conjuncts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fallacy {
    pub judge: String,
    pub conjunction: String,
    pub p_conjunction: f64,
    pub conjunct: String,
    pub p_conjunct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub judges: Vec<JudgeCheck>,
    pub pooled: CoherenceCheck,
    pub fallacies: Vec<Fallacy>,
}

impl CheckReport {
    pub fn incoherent_judges(&self) -> impl Iterator<Item = &JudgeCheck> {
        self.judges.iter().filter(|j| !j.check.coherent)
    }
}

fn check_pooled(
    pooled: &PooledForecastSet,
    strategy: Strategy,
    cap: usize,
) -> Result<CoherenceCheck> {
    let design = design_subsets(pooled, strategy, cap)?;
    let events = pooled.events();
    let weights = pooled.weights();
    let means = pooled.means();
    let mut subsets = Vec::with_capacity(design.len());
    for s in &design.subsets {
        let ev: Vec<_> = s.iter().map(|&i| events[i].clone()).collect();
        let w: Vec<f64> = s.iter().map(|&i| weights[i]).collect();
        let x: Vec<f64> = s.iter().map(|&i| means[i]).collect();
        let poly = build_polytope(&ev, &w, cap)?;
        subsets.push(SubsetResidual {
            events: ev.iter().map(|e| e.to_string()).collect(),
            residual: distance_to(&poly, &x)?,
        });
    }
    let max_residual = subsets.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(CoherenceCheck {
        subsets,
        max_residual,
        coherent: max_residual <= MEMBERSHIP_TOL,
    })
}

fn fallacies(judge: &str, own: &[Forecast]) -> Vec<Fallacy> {
    let mut by_key = HashMap::new();
    for f in own {
        by_key.entry(f.event.canonical_key()).or_insert(f);
    }
    let mut out = Vec::new();
    for f in own {
        let Some((Connective::And, left, right)) = f.event.split_binary() else {
            continue;
        };
        for arg in [left, right] {
            if let Some(g) = by_key.get(&arg.canonical_key()) {
                if f.p_hat > g.p_hat + MEMBERSHIP_TOL {
                    out.push(Fallacy {
                        judge: judge.to_string(),
                        conjunction: f.event.to_string(),
                        p_conjunction: f.p_hat,
                        conjunct: g.event.to_string(),
                        p_conjunct: g.p_hat,
                    });
                }
            }
        }
    }
    out
}

/// Local-coherence residuals per judge and for the pooled panel under the
/// given design, plus conjunction-fallacy flags.
pub fn check_forecasts(
    forecasts: &[Forecast],
    strategy: Strategy,
    cap: usize,
) -> Result<CheckReport> {
    let pooled = pool(forecasts)?;
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<Forecast>> = HashMap::new();
    for f in forecasts {
        groups
            .entry(f.judge.as_str())
            .or_insert_with(|| {
                order.push(f.judge.as_str());
                Vec::new()
            })
            .push(f.clone());
    }
    let mut judges = Vec::with_capacity(order.len());
    let mut flags = Vec::new();
    for name in order {
        let own = &groups[name];
        judges.push(JudgeCheck {
            judge: name.to_string(),
            check: check_pooled(&pool(own)?, strategy, cap)?,
        });
        flags.extend(fallacies(name, own));
    }
    Ok(CheckReport {
        judges,
        pooled: check_pooled(&pooled, strategy, cap)?,
        fallacies: flags,
    })
}
