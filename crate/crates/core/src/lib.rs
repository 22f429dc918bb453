//! Coherent aggregation of probability forecasts.
//!
//! Forecasts from a panel of judges are pooled by event, then pushed toward
//! probabilistic coherence by cyclically projecting onto small local
//! coherence polytopes. See the crate README for an overview.

pub mod bench;
pub mod check;
pub mod config;
pub mod dykstra;
pub mod engine;
pub mod error;
pub mod event;
pub mod forecast;
pub mod io;
mod linalg;
pub mod oracle;
pub mod polytope;
pub mod scoring;
pub mod synth;

pub use config::{EngineConfig, Method, RunConfig, Strategy, Tolerances};
pub use dykstra::{project_onto_dykstra, IndexedPolytope};
pub use engine::{
    aggregate, aggregate_observed, design_subsets, linear_average, pool, schedule_parallel,
    AggregationReport, PooledEntry, PooledForecastSet, SubsetDesign, SweepStats,
};
pub use error::{Error, Result};
pub use event::{
    enumerate_support_assignments, parse_event, EventExpr, EventKey, TruthAssignment,
    DEFAULT_SUPPORT_CAP,
};
pub use forecast::Forecast;
pub use oracle::global_cap_oracle;
pub use polytope::{build_polytope, is_coherent, project_onto, ProbVector, VertexPolytope};
