//! Brier score, slope, and the four-case evaluation protocol.

use std::collections::HashMap;

use serde::Serialize;

use crate::config::{EngineConfig, Strategy};
use crate::engine::{aggregate, design_subsets, pool, AggregationReport, PooledForecastSet};
use crate::error::{Error, Result};
use crate::forecast::Forecast;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BrierScore {
    /// Sum of squared errors over all forecasts.
    pub total: f64,
    /// `total` divided by the forecast count.
    pub mean: f64,
    pub count: usize,
}

fn indicator(t: bool) -> f64 {
    if t {
        1.0
    } else {
        0.0
    }
}

fn truths_of(forecasts: &[Forecast]) -> Result<Vec<bool>> {
    forecasts
        .iter()
        .map(|f| {
            f.truth
                .ok_or_else(|| Error::MissingTruth(f.event.to_string()))
        })
        .collect()
}

pub fn brier_probs(probs: &[f64], truths: &[bool]) -> Result<BrierScore> {
    if probs.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: truths.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::NoForecasts);
    }
    let total: f64 = probs
        .iter()
        .zip(truths)
        .map(|(p, &t)| (indicator(t) - p).powi(2))
        .sum();
    Ok(BrierScore {
        total,
        mean: total / probs.len() as f64,
        count: probs.len(),
    })
}

pub fn brier(forecasts: &[Forecast]) -> Result<BrierScore> {
    let truths = truths_of(forecasts)?;
    let probs: Vec<f64> = forecasts.iter().map(|f| f.p_hat).collect();
    brier_probs(&probs, &truths)
}

/// `Σ w_i (q_i − t_i)²`.
pub fn weighted_brier(q: &[f64], truths: &[bool], weights: &[f64]) -> f64 {
    q.iter()
        .zip(truths)
        .zip(weights)
        .map(|((q, &t), w)| w * (q - indicator(t)).powi(2))
        .sum()
}

pub fn slope_probs(probs: &[f64], truths: &[bool]) -> Result<f64> {
    if probs.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: truths.len(),
        });
    }
    let (mut sum_t, mut n_t, mut sum_f) = (0.0, 0usize, 0.0);
    for (p, &t) in probs.iter().zip(truths) {
        if t {
            sum_t += p;
            n_t += 1;
        } else {
            sum_f += p;
        }
    }
    let n_f = probs.len() - n_t;
    if n_t == 0 || n_f == 0 {
        return Err(Error::UndefinedSlope {
            true_count: n_t,
            total: probs.len(),
        });
    }
    Ok(sum_t / n_t as f64 - sum_f / n_f as f64)
}

pub fn slope(forecasts: &[Forecast]) -> Result<f64> {
    let truths = truths_of(forecasts)?;
    let probs: Vec<f64> = forecasts.iter().map(|f| f.p_hat).collect();
    slope_probs(&probs, &truths)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Raw,
    Individual,
    Aggregate,
    LinearAvg,
}

impl Case {
    pub const ALL: [Case; 4] = [
        Case::Raw,
        Case::Individual,
        Case::Aggregate,
        Case::LinearAvg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Case::Raw => "raw",
            Case::Individual => "individual",
            Case::Aggregate => "aggregate",
            Case::LinearAvg => "linear_avg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JudgeScore {
    pub judge: String,
    pub forecasts: usize,
    pub brier: f64,
    pub brier_total: f64,
    /// `None` when the judge's events are all true or all false.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreReport {
    pub case: Case,
    pub judges: Vec<JudgeScore>,
    /// Mean of per-judge Brier scores, judges weighted equally.
    pub mean_brier: f64,
    /// Mean of the defined per-judge slopes, judges weighted equally.
    pub mean_slope: Option<f64>,
    /// Mean squared error over every forecast in the panel, which for the
    /// aggregate case is the weighted pooled score divided by the forecast count.
    pub forecast_brier: f64,
    pub judge_weighting: &'static str,
}

impl ScoreReport {
    fn from_forecasts(case: Case, panel: &[Forecast]) -> Result<Self> {
        let mut order: Vec<&str> = Vec::new();
        let mut by_judge: HashMap<&str, Vec<Forecast>> = HashMap::new();
        for f in panel {
            by_judge
                .entry(f.judge.as_str())
                .or_insert_with(|| {
                    order.push(f.judge.as_str());
                    Vec::new()
                })
                .push(f.clone());
        }
        let mut judges = Vec::with_capacity(order.len());
        for name in order {
            let fs = &by_judge[name];
            let b = brier(fs)?;
            let s = match slope(fs) {
                Ok(s) => Some(s),
                Err(Error::UndefinedSlope { .. }) => None,
                Err(e) => return Err(e),
            };
            judges.push(JudgeScore {
                judge: name.to_string(),
                forecasts: fs.len(),
                brier: b.mean,
                brier_total: b.total,
                slope: s,
            });
        }
        let mean_brier = judges.iter().map(|j| j.brier).sum::<f64>() / judges.len() as f64;
        let slopes: Vec<f64> = judges.iter().filter_map(|j| j.slope).collect();
        let mean_slope =
            (!slopes.is_empty()).then(|| slopes.iter().sum::<f64>() / slopes.len() as f64);
        Ok(ScoreReport {
            case,
            judges,
            mean_brier,
            mean_slope,
            forecast_brier: brier(panel)?.mean,
            judge_weighting: "equal",
        })
    }
}

/// Every forecast with its probability replaced by the value of its pooled entry.
pub fn replace_with(
    panel: &[Forecast],
    pooled: &PooledForecastSet,
    values: &[f64],
) -> Vec<Forecast> {
    panel
        .iter()
        .map(|f| {
            let i = pooled
                .position(&f.event.canonical_key())
                .expect("forecast belongs to the pooled set");
            Forecast {
                p_hat: values[i].clamp(0.0, 1.0),
                ..f.clone()
            }
        })
        .collect()
}

/// Pool `forecasts`, build the named design, and aggregate.
pub fn run_pipeline(
    forecasts: &[Forecast],
    strategy: Strategy,
    config: &EngineConfig,
) -> Result<(PooledForecastSet, AggregationReport)> {
    let pooled = pool(forecasts)?;
    let design = design_subsets(&pooled, strategy, config.support_cap)?;
    let report = aggregate(&pooled, &design, config)?;
    Ok((pooled, report))
}

/// Scores for the raw, individual, aggregate and linear-average cases, in that order.
pub fn evaluate_cases(
    panel: &[Forecast],
    strategy: Strategy,
    config: &EngineConfig,
) -> Result<Vec<ScoreReport>> {
    if panel.is_empty() {
        return Err(Error::NoForecasts);
    }
    truths_of(panel)?;

    let mut order: Vec<&str> = Vec::new();
    let mut rows: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, f) in panel.iter().enumerate() {
        rows.entry(f.judge.as_str())
            .or_insert_with(|| {
                order.push(f.judge.as_str());
                Vec::new()
            })
            .push(i);
    }
    let mut individual = panel.to_vec();
    for name in order {
        let at = &rows[name];
        let own: Vec<Forecast> = at.iter().map(|&i| panel[i].clone()).collect();
        let (pooled, report) = run_pipeline(&own, strategy, config)?;
        for (&i, g) in at
            .iter()
            .zip(replace_with(&own, &pooled, &report.final_probs))
        {
            individual[i] = g;
        }
    }

    let (pooled, report) = run_pipeline(panel, strategy, config)?;
    let aggregated = replace_with(panel, &pooled, &report.final_probs);
    let averaged = replace_with(panel, &pooled, &pooled.means());

    Ok(vec![
        ScoreReport::from_forecasts(Case::Raw, panel)?,
        ScoreReport::from_forecasts(Case::Individual, &individual)?,
        ScoreReport::from_forecasts(Case::Aggregate, &aggregated)?,
        ScoreReport::from_forecasts(Case::LinearAvg, &averaged)?,
    ])
}
