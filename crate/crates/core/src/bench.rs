//! Timing and convergence runs over synthetic panels.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::config::{EngineConfig, Strategy};
use crate::engine::SweepStats;
use crate::error::Result;
use crate::scoring::run_pipeline;
use crate::synth::{generate, DatasetPreset};

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub presets: Vec<DatasetPreset>,
    pub seeds: Vec<u64>,
    pub noise: f64,
    pub strategy: Strategy,
    pub engine: EngineConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRun {
    pub dataset: String,
    pub seed: u64,
    pub judges: usize,
    pub vars: usize,
    pub forecasts: usize,
    pub pooled: usize,
    pub subsets: usize,
    pub sweeps_run: usize,
    pub converged: bool,
    /// Pooling, design and aggregation; generation is excluded.
    pub seconds: f64,
    pub initial_brier: f64,
    pub curve: Vec<SweepStats>,
}

pub fn run_one(
    preset: &DatasetPreset,
    seed: u64,
    noise: f64,
    strategy: Strategy,
    engine: &EngineConfig,
) -> Result<BenchRun> {
    let panel = generate(&preset.config(noise, seed))?;
    let start = Instant::now();
    let (pooled, report) = run_pipeline(&panel.forecasts, strategy, engine)?;
    let seconds = start.elapsed().as_secs_f64();
    let total: f64 = pooled.weights().iter().sum();
    Ok(BenchRun {
        dataset: preset.name.to_string(),
        seed,
        judges: preset.judges,
        vars: preset.vars,
        forecasts: panel.forecasts.len(),
        pooled: pooled.len(),
        subsets: crate::engine::design_subsets(&pooled, strategy, engine.support_cap)?.len(),
        sweeps_run: report.iterations_run,
        converged: report.converged,
        seconds,
        initial_brier: report.initial_brier.unwrap_or(f64::NAN) / total,
        curve: report.sweeps,
    })
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRun>> {
    let mut runs = Vec::new();
    for preset in &config.presets {
        for &seed in &config.seeds {
            runs.push(run_one(
                preset,
                seed,
                config.noise,
                config.strategy,
                &config.engine,
            )?);
        }
    }
    Ok(runs)
}

/// One row per run.
pub fn write_timing_csv(writer: impl Write, runs: &[BenchRun]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "dataset",
        "seed",
        "judges",
        "vars",
        "forecasts",
        "pooled",
        "subsets",
        "sweeps",
        "converged",
        "seconds",
    ])
    .map_err(csv_io)?;
    for r in runs {
        w.write_record([
            r.dataset.clone(),
            r.seed.to_string(),
            r.judges.to_string(),
            r.vars.to_string(),
            r.forecasts.to_string(),
            r.pooled.to_string(),
            r.subsets.to_string(),
            r.sweeps_run.to_string(),
            r.converged.to_string(),
            format!("{:.6}", r.seconds),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean pooled Brier score after each sweep, sweep 0 being the input.
pub fn write_curves_csv(writer: impl Write, runs: &[BenchRun]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "dataset",
        "seed",
        "sweep",
        "brier",
        "max_move",
        "max_residual",
    ])
    .map_err(csv_io)?;
    for r in runs {
        w.write_record([
            &r.dataset,
            &r.seed.to_string(),
            "0",
            &r.initial_brier.to_string(),
            "",
            "",
        ])
        .map_err(csv_io)?;
        for s in &r.curve {
            w.write_record([
                r.dataset.clone(),
                r.seed.to_string(),
                s.sweep.to_string(),
                s.brier_mean.map_or(String::new(), |b| b.to_string()),
                s.max_move.to_string(),
                s.max_residual.to_string(),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::Error::InvalidParameter(format!("{other:?}")),
    }
}
