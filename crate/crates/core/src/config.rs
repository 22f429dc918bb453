//! Tolerances and run configuration shared by the engine, scoring and CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::event::DEFAULT_SUPPORT_CAP;

/// Numerical tolerances. One place, so tests and the CLI agree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Distance to a coherence polytope below which a point counts as a member.
    pub membership: f64,
    /// Per-coordinate agreement required between the engine and the global oracle.
    pub oracle: f64,
    /// Largest admissible variational-inequality residual of a projection.
    pub kkt: f64,
    /// A projection closer than this (max-abs) to its input returns the input unchanged.
    pub snap: f64,
}

pub const MEMBERSHIP_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-6;
pub const KKT_TOL: f64 = 1e-9;
pub const SNAP_TOL: f64 = 1e-12;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: MEMBERSHIP_TOL,
            oracle: ORACLE_TOL,
            kkt: KKT_TOL,
            snap: SNAP_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Plain cyclic projection, one pass over the subsets per sweep.
    #[default]
    Cyclic,
    /// Cyclic projection with Dykstra correction vectors.
    Dykstra,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "cyclic" => Ok(Method::Cyclic),
            "dykstra" => Ok(Method::Dykstra),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cyclic => "cyclic",
            Method::Dykstra => "dykstra",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub method: Method,
    pub max_sweeps: usize,
    /// Convergence threshold on the largest coordinate move over one sweep.
    pub tol: f64,
    /// Run each batch of disjoint subsets concurrently. Switches the sweep
    /// order to the batch schedule.
    pub parallel: bool,
    pub support_cap: usize,
    /// Keep the working vector after every sweep in the report.
    #[serde(default)]
    pub keep_iterates: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            method: Method::Cyclic,
            max_sweeps: 50,
            tol: 1e-7,
            parallel: false,
            support_cap: DEFAULT_SUPPORT_CAP,
            keep_iterates: false,
        }
    }
}

/// Named subset-design strategies; custom designs are built directly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// One subset per event.
    Singleton,
    /// Complement pairs and connective/argument triples, singletons for the rest.
    #[default]
    Neighborhood,
    /// A single subset holding every event.
    Global,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "singleton" => Ok(Strategy::Singleton),
            "neighborhood" => Ok(Strategy::Neighborhood),
            "global" => Ok(Strategy::Global),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Singleton => "singleton",
            Strategy::Neighborhood => "neighborhood",
            Strategy::Global => "global",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub design: Strategy,
    pub engine: EngineConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            design: Strategy::Neighborhood,
            engine: EngineConfig::default(),
            seed: 1,
        }
    }
}
