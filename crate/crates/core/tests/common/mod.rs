#![allow(dead_code)]

use std::collections::HashSet;

use capagg_core::{EventExpr, Forecast, TruthAssignment};
use rand::Rng;

pub fn var(i: usize) -> EventExpr {
    EventExpr::var(format!("v{i}"))
}

/// A literal or a two-literal conjunction/disjunction over `n` variables.
pub fn random_event(rng: &mut impl Rng, n: usize) -> EventExpr {
    let lit = |rng: &mut dyn rand::RngCore, i: usize| {
        if rng.random_bool(0.3) {
            EventExpr::not(var(i))
        } else {
            var(i)
        }
    };
    let a = rng.random_range(0..n);
    if n < 2 || rng.random_bool(0.35) {
        return lit(rng, a);
    }
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let (l, r) = (lit(rng, a), lit(rng, b));
    let e = if rng.random_bool(0.5) {
        EventExpr::and(l, r)
    } else {
        EventExpr::or(l, r)
    };
    if rng.random_bool(0.1) {
        EventExpr::not(e)
    } else {
        e
    }
}

/// Up to `max_events` distinct events over at most `max_vars` variables, with
/// each variable's negation sometimes added so complement pairs occur.
pub fn random_events(rng: &mut impl Rng, max_vars: usize, max_events: usize) -> Vec<EventExpr> {
    let n = rng.random_range(1..=max_vars);
    let target = rng.random_range(1..=max_events);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..target * 4 {
        if out.len() == target {
            break;
        }
        let e = random_event(rng, n);
        if seen.insert(e.canonical_key()) {
            out.push(e);
        }
    }
    out
}

/// Several judges, each forecasting a random subset of `events` with
/// uniformly random probabilities. Every event gets at least one forecast.
pub fn random_panel(rng: &mut impl Rng, events: &[EventExpr], judges: usize) -> Vec<Forecast> {
    let mut out = Vec::new();
    for (k, e) in events.iter().enumerate() {
        let j = k % judges;
        out.push(Forecast::new(format!("j{j}"), e.clone(), rng.random(), None).unwrap());
    }
    for j in 0..judges {
        for e in events {
            if rng.random_bool(0.4) {
                out.push(Forecast::new(format!("j{j}"), e.clone(), rng.random(), None).unwrap());
            }
        }
    }
    out
}

/// Truth vectors of `events` under every assignment of their joint support.
pub fn truth_table(events: &[EventExpr]) -> Vec<Vec<bool>> {
    let vars = capagg_core::event::joint_support(events);
    (0..1u64 << vars.len())
        .map(|m| {
            let t: TruthAssignment = vars
                .iter()
                .enumerate()
                .map(|(k, v)| (v.clone(), m >> k & 1 == 1))
                .collect();
            events.iter().map(|e| e.evaluate(&t).unwrap()).collect()
        })
        .collect()
}

pub fn weighted_brier(q: &[f64], truth: &[bool], w: &[f64]) -> f64 {
    q.iter()
        .zip(truth)
        .zip(w)
        .map(|((q, &t), w)| w * (q - if t { 1.0 } else { 0.0 }).powi(2))
        .sum()
}
