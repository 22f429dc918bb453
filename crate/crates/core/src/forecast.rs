use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::EventExpr;

/// One judge's probability for one event, with the realized truth if known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub judge: String,
    pub event: EventExpr,
    pub p_hat: f64,
    pub truth: Option<bool>,
}

impl Forecast {
    pub fn new(
        judge: impl Into<String>,
        event: EventExpr,
        p_hat: f64,
        truth: Option<bool>,
    ) -> Result<Self> {
        check_probability(p_hat)?;
        Ok(Forecast {
            judge: judge.into(),
            event,
            p_hat,
            truth,
        })
    }
}

pub(crate) fn check_probability(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { value })
    }
}
