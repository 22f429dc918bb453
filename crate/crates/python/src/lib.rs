//! Python bindings for the aggregation engine.
//!
//! Forecast rows are `(judge, event, prob, truth)` tuples, with `truth`
//! either a bool or `None`.

use std::collections::HashMap;

use capagg_core as core;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type Row = (String, String, f64, Option<bool>);

fn forecasts(rows: Vec<Row>) -> PyResult<Vec<core::Forecast>> {
    rows.into_iter()
        .map(|(judge, event, p, truth)| {
            let event = core::parse_event(&event).map_err(err)?;
            core::Forecast::new(judge, event, p, truth).map_err(err)
        })
        .collect()
}

fn parse_events(events: &[String]) -> PyResult<Vec<core::EventExpr>> {
    events
        .iter()
        .map(|e| core::parse_event(e).map_err(err))
        .collect()
}

fn engine_config(
    method: &str,
    sweeps: usize,
    tol: f64,
    parallel: bool,
    cap: usize,
) -> PyResult<core::EngineConfig> {
    Ok(core::EngineConfig {
        method: method.parse().map_err(err)?,
        max_sweeps: sweeps,
        tol,
        parallel,
        support_cap: cap,
        keep_iterates: false,
    })
}

/// A parsed event expression.
#[pyclass(name = "Event", frozen)]
struct Event(core::EventExpr);

#[pymethods]
impl Event {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        core::parse_event(text).map(Event).map_err(err)
    }

    /// Key shared by all logically equivalent expressions.
    fn canonical_key(&self) -> String {
        self.0.canonical_key().to_string()
    }

    fn support(&self) -> Vec<String> {
        self.0.support().into_iter().collect()
    }

    fn evaluate(&self, assignment: HashMap<String, bool>) -> PyResult<bool> {
        let t: core::TruthAssignment = assignment.into_iter().collect();
        self.0.evaluate(&t).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Event({:?})", self.0.to_string())
    }
}

/// Coherence polytope of a list of events under a weighted norm.
#[pyclass(name = "Polytope", frozen)]
struct Polytope(core::VertexPolytope);

#[pymethods]
impl Polytope {
    #[new]
    #[pyo3(signature = (events, weights=None, cap=core::DEFAULT_SUPPORT_CAP))]
    fn new(events: Vec<String>, weights: Option<Vec<f64>>, cap: usize) -> PyResult<Self> {
        let events = parse_events(&events)?;
        let weights = weights.unwrap_or_else(|| vec![1.0; events.len()]);
        core::build_polytope(&events, &weights, cap)
            .map(Polytope)
            .map_err(err)
    }

    fn vertices(&self) -> Vec<Vec<f64>> {
        self.0.vertices().to_vec()
    }

    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        core::project_onto(&self.0, &x)
            .map(|p| p.into_vec())
            .map_err(err)
    }

    #[pyo3(signature = (x, tol=1e-9))]
    fn is_coherent(&self, x: Vec<f64>, tol: f64) -> PyResult<bool> {
        core::is_coherent(&self.0, &x, tol).map_err(err)
    }
}

#[pyclass(name = "Aggregate", frozen, get_all)]
struct Aggregate {
    events: Vec<String>,
    weights: Vec<usize>,
    input: Vec<f64>,
    probs: Vec<f64>,
    iterations: usize,
    converged: bool,
    max_moves: Vec<f64>,
    /// Mean pooled Brier score after each sweep, when truths were given.
    brier: Vec<f64>,
}

#[pymethods]
impl Aggregate {
    fn as_dict(&self) -> HashMap<String, f64> {
        self.events
            .iter()
            .cloned()
            .zip(self.probs.iter().copied())
            .collect()
    }
}

/// Pooled `(event, mean, count)` triples in first-appearance order.
#[pyfunction]
fn pool(rows: Vec<Row>) -> PyResult<Vec<(String, f64, usize)>> {
    let pooled = core::pool(&forecasts(rows)?).map_err(err)?;
    Ok(pooled
        .entries()
        .iter()
        .map(|e| (e.event.to_string(), e.q_hat, e.weight))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (rows, design="neighborhood", method="cyclic", sweeps=50, tol=1e-7, parallel=false, cap=core::DEFAULT_SUPPORT_CAP))]
fn aggregate(
    rows: Vec<Row>,
    design: &str,
    method: &str,
    sweeps: usize,
    tol: f64,
    parallel: bool,
    cap: usize,
) -> PyResult<Aggregate> {
    let strategy: core::Strategy = design.parse().map_err(err)?;
    let config = engine_config(method, sweeps, tol, parallel, cap)?;
    let (_, r) = core::scoring::run_pipeline(&forecasts(rows)?, strategy, &config).map_err(err)?;
    Ok(Aggregate {
        max_moves: r.sweeps.iter().map(|s| s.max_move).collect(),
        brier: r.sweeps.iter().filter_map(|s| s.brier_mean).collect(),
        events: r.events,
        weights: r.weights,
        input: r.input,
        probs: r.final_probs.into_vec(),
        iterations: r.iterations_run,
        converged: r.converged,
    })
}

/// Exact weighted projection onto the global coherence polytope.
#[pyfunction]
#[pyo3(signature = (events, x, weights=None, cap=core::DEFAULT_SUPPORT_CAP))]
fn oracle(
    events: Vec<String>,
    x: Vec<f64>,
    weights: Option<Vec<f64>>,
    cap: usize,
) -> PyResult<Vec<f64>> {
    let events = parse_events(&events)?;
    let weights = weights.unwrap_or_else(|| vec![1.0; events.len()]);
    core::global_cap_oracle(&events, &weights, &x, cap)
        .map(|p| p.into_vec())
        .map_err(err)
}

/// Total and per-forecast mean Brier score.
#[pyfunction]
fn brier(probs: Vec<f64>, truths: Vec<bool>) -> PyResult<(f64, f64)> {
    let b = core::scoring::brier_probs(&probs, &truths).map_err(err)?;
    Ok((b.total, b.mean))
}

#[pyfunction]
fn slope(probs: Vec<f64>, truths: Vec<bool>) -> PyResult<f64> {
    core::scoring::slope_probs(&probs, &truths).map_err(err)
}

/// Per-forecast Brier score for the raw, individual, aggregate and linear-average cases.
#[pyfunction]
#[pyo3(signature = (rows, design="neighborhood", method="cyclic", sweeps=50, tol=1e-7))]
fn evaluate_cases(
    rows: Vec<Row>,
    design: &str,
    method: &str,
    sweeps: usize,
    tol: f64,
) -> PyResult<HashMap<String, f64>> {
    let strategy: core::Strategy = design.parse().map_err(err)?;
    let config = engine_config(method, sweeps, tol, false, core::DEFAULT_SUPPORT_CAP)?;
    let reports =
        core::scoring::evaluate_cases(&forecasts(rows)?, strategy, &config).map_err(err)?;
    Ok(reports
        .into_iter()
        .map(|r| (r.case.as_str().to_string(), r.forecast_brier))
        .collect())
}

/// Synthetic panel as a list of rows.
#[pyfunction]
#[pyo3(signature = (vars=10, judges=30, events=34, noise=0.15, seed=1, correlated=false))]
fn generate(
    vars: usize,
    judges: usize,
    events: usize,
    noise: f64,
    seed: u64,
    correlated: bool,
) -> PyResult<Vec<Row>> {
    let config = core::synth::GenConfig {
        n_vars: vars,
        n_judges: judges,
        events_per_judge: events,
        noise,
        seed,
        correlated,
        ..Default::default()
    };
    let panel = core::synth::generate(&config).map_err(err)?;
    Ok(panel
        .forecasts
        .into_iter()
        .map(|f| (f.judge, f.event.to_string(), f.p_hat, f.truth))
        .collect())
}

#[pymodule]
fn capagg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Event>()?;
    m.add_class::<Polytope>()?;
    m.add_class::<Aggregate>()?;
    m.add_function(wrap_pyfunction!(pool, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(brier, m)?)?;
    m.add_function(wrap_pyfunction!(slope, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_cases, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
