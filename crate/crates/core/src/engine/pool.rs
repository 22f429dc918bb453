//! Pooling duplicate forecasts into one weighted entry per distinct event.
//!
//! Projecting the pooled means with weights `N_j` is the same problem as
//! projecting every original forecast separately, so the engine only ever
//! sees unique events.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::{EventExpr, EventKey};
use crate::forecast::{check_probability, Forecast};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PooledEntry {
    /// Expression as first seen in the input.
    pub event: EventExpr,
    pub key: EventKey,
    /// Mean of the contributing probabilities.
    pub q_hat: f64,
    /// Number of contributing forecasts.
    pub weight: usize,
    pub contributions: Vec<(String, f64)>,
    pub truth: Option<bool>,
}

#[derive(Clone, Debug, Default)]
pub struct PooledForecastSet {
    entries: Vec<PooledEntry>,
    index: HashMap<EventKey, usize>,
}

impl PooledForecastSet {
    pub fn entries(&self) -> &[PooledEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, key: &EventKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn events(&self) -> Vec<EventExpr> {
        self.entries.iter().map(|e| e.event.clone()).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.q_hat).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.weight as f64).collect()
    }

    /// Truth of every entry, or `None` if any is unknown.
    pub fn truths(&self) -> Option<Vec<bool>> {
        self.entries.iter().map(|e| e.truth).collect()
    }
}

/// One entry per distinct event (by canonical key), in first-appearance order.
pub fn pool(forecasts: &[Forecast]) -> Result<PooledForecastSet> {
    if forecasts.is_empty() {
        return Err(Error::NoForecasts);
    }
    let mut set = PooledForecastSet::default();
    let mut sums: Vec<f64> = Vec::new();
    for f in forecasts {
        check_probability(f.p_hat)?;
        let key = f.event.canonical_key();
        let at = match set.index.get(&key) {
            Some(&at) => at,
            None => {
                set.index.insert(key.clone(), set.entries.len());
                set.entries.push(PooledEntry {
                    event: f.event.clone(),
                    key,
                    q_hat: 0.0,
                    weight: 0,
                    contributions: Vec::new(),
                    truth: None,
                });
                sums.push(0.0);
                set.entries.len() - 1
            }
        };
        let entry = &mut set.entries[at];
        match (entry.truth, f.truth) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::ConflictingTruth(entry.event.to_string()))
            }
            (None, Some(b)) => entry.truth = Some(b),
            _ => {}
        }
        sums[at] += f.p_hat;
        entry.weight += 1;
        entry.contributions.push((f.judge.clone(), f.p_hat));
    }
    for (entry, sum) in set.entries.iter_mut().zip(sums) {
        entry.q_hat = sum / entry.weight as f64;
    }
    Ok(set)
}

/// The unweighted linear-averaging baseline: pooled means.
pub fn linear_average(forecasts: &[Forecast]) -> Result<PooledForecastSet> {
    pool(forecasts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::parse_event;

    fn f(judge: &str, event: &str, p: f64) -> Forecast {
        Forecast::new(judge, parse_event(event).unwrap(), p, None).unwrap()
    }

    #[test]
    fn pools_duplicates_by_meaning() {
        let set = pool(&[f("j1", "F", 0.4), f("j2", "F", 0.6)]).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.entries()[0].q_hat - 0.5).abs() < 1e-15);
        assert_eq!(set.entries()[0].weight, 2);

        let set = pool(&[f("j1", "p", 0.7)]).unwrap();
        assert_eq!(set.entries()[0].q_hat, 0.7);
        assert_eq!(set.entries()[0].weight, 1);

        let set = pool(&[f("j1", "p & q", 0.2), f("j2", "q & p", 0.4)]).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.entries()[0].q_hat - 0.3).abs() < 1e-15);
        assert_eq!(set.entries()[0].event.to_string(), "p & q");
    }

    #[test]
    fn first_appearance_order() {
        let set = pool(&[f("a", "q", 0.1), f("a", "p", 0.2), f("b", "q", 0.3)]).unwrap();
        let names: Vec<String> = set.entries().iter().map(|e| e.event.to_string()).collect();
        assert_eq!(names, ["q", "p"]);
        assert_eq!(
            set.entries()[0].contributions,
            vec![("a".into(), 0.1), ("b".into(), 0.3)]
        );
    }

    #[test]
    fn table_three_linear_average() {
        let panel = [
            f("alice", "p", 0.75),
            f("alice", "q", 0.20),
            f("bob", "p", 0.60),
            f("bob", "p & q", 0.40),
            f("chris", "q", 0.00),
            f("chris", "p & q", 0.00),
        ];
        let avg = linear_average(&panel).unwrap();
        let means = avg.means();
        assert!((means[0] - 0.675).abs() < 1e-12);
        assert!((means[1] - 0.10).abs() < 1e-12);
        assert!((means[2] - 0.20).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(pool(&[]), Err(Error::NoForecasts)));
        let mut bad = f("j", "p", 0.5);
        bad.p_hat = 1.3;
        assert!(matches!(
            pool(&[bad]),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        let mut a = f("j1", "p", 0.5);
        a.truth = Some(true);
        let mut b = f("j2", "p", 0.5);
        b.truth = Some(false);
        assert!(matches!(pool(&[a, b]), Err(Error::ConflictingTruth(_))));
        assert!(Forecast::new("j", parse_event("p").unwrap(), -0.1, None).is_err());
    }
}
