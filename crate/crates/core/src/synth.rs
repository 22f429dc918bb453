//! Seeded synthetic forecast panels.
//!
//! A ground-truth distribution over `n_vars` Boolean variables is drawn,
//! one world is sampled from it, and every judge reports the true
//! probabilities of a random event set plus Gaussian noise clamped to [0, 1].

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{EventExpr, EventKey, TruthAssignment};
use crate::forecast::Forecast;

/// Relative weights of the complex forms `p & q`, `p & !q`, `p | q`, `p | !q`.
pub type FormWeights = [f64; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_vars: usize,
    pub n_judges: usize,
    pub events_per_judge: usize,
    /// Standard deviation of the additive noise.
    pub noise: f64,
    pub seed: u64,
    /// Share of each judge's events that are basic.
    pub basic_fraction: f64,
    pub form_weights: FormWeights,
    /// Draw variables from a two-component mixture instead of independently.
    pub correlated: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_vars: 10,
            n_judges: 30,
            events_per_judge: 34,
            noise: 0.15,
            seed: 1,
            basic_fraction: 10.0 / 34.0,
            form_weights: [1.0; 4],
            correlated: false,
        }
    }
}

/// Panel shapes of the five reference datasets: judges, basic variables, 34 events each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DatasetPreset {
    pub name: &'static str,
    pub judges: usize,
    pub vars: usize,
    pub events_per_judge: usize,
}

pub const PRESETS: [DatasetPreset; 5] = [
    DatasetPreset {
        name: "STCK",
        judges: 47,
        vars: 30,
        events_per_judge: 34,
    },
    DatasetPreset {
        name: "FIN",
        judges: 31,
        vars: 10,
        events_per_judge: 34,
    },
    DatasetPreset {
        name: "NBA1",
        judges: 29,
        vars: 10,
        events_per_judge: 34,
    },
    DatasetPreset {
        name: "NBA2",
        judges: 36,
        vars: 10,
        events_per_judge: 34,
    },
    DatasetPreset {
        name: "HSTN",
        judges: 17,
        vars: 10,
        events_per_judge: 34,
    },
];

pub fn preset(name: &str) -> Option<DatasetPreset> {
    PRESETS
        .iter()
        .copied()
        .find(|p| p.name.eq_ignore_ascii_case(name))
}

impl DatasetPreset {
    /// Total forecasts in a panel of this shape.
    pub fn forecasts(&self) -> usize {
        self.judges * self.events_per_judge
    }

    pub fn config(&self, noise: f64, seed: u64) -> GenConfig {
        GenConfig {
            n_vars: self.vars,
            n_judges: self.judges,
            events_per_judge: self.events_per_judge,
            noise,
            seed,
            ..GenConfig::default()
        }
    }
}

#[derive(Clone, Debug)]
enum World {
    Independent(Vec<f64>),
    /// Equal mixture of two independent products.
    Mixture(Vec<f64>, Vec<f64>),
}

impl World {
    fn prob(&self, event: &EventExpr) -> f64 {
        match self {
            World::Independent(m) => product_prob(event, m),
            World::Mixture(a, b) => 0.5 * product_prob(event, a) + 0.5 * product_prob(event, b),
        }
    }
}

fn var_index(name: &str) -> usize {
    name[1..].parse::<usize>().expect("generated variable name") - 1
}

fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

/// Exact probability under independent marginals, by enumerating the support.
fn product_prob(event: &EventExpr, marginals: &[f64]) -> f64 {
    let vars: Vec<String> = event.support().into_iter().collect();
    let mut total = 0.0;
    for mask in 0..1u64 << vars.len() {
        let mut t = TruthAssignment::new();
        let mut weight = 1.0;
        for (k, v) in vars.iter().enumerate() {
            let bit = mask >> k & 1 == 1;
            let m = marginals[var_index(v)];
            weight *= if bit { m } else { 1.0 - m };
            t.set(v.clone(), bit);
        }
        if event.evaluate(&t).expect("support is complete") {
            total += weight;
        }
    }
    total
}

/// A generated panel together with the world it was drawn from.
#[derive(Clone, Debug)]
pub struct Panel {
    pub forecasts: Vec<Forecast>,
    pub truth: TruthAssignment,
    /// Marginal probability of each variable.
    pub marginals: Vec<f64>,
}

fn validate(config: &GenConfig) -> Result<(usize, usize)> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
    if config.n_vars == 0 || config.n_judges == 0 || config.events_per_judge == 0 {
        return bad("n_vars, n_judges and events_per_judge must be positive");
    }
    if !(config.noise >= 0.0 && config.noise.is_finite()) {
        return bad("noise must be a non-negative number");
    }
    if !(0.0..=1.0).contains(&config.basic_fraction) {
        return bad("basic_fraction must lie in [0, 1]");
    }
    if config
        .form_weights
        .iter()
        .any(|w| !(*w >= 0.0 && w.is_finite()))
        || config.form_weights.iter().sum::<f64>() <= 0.0
    {
        return bad("form weights must be non-negative with a positive sum");
    }
    let basic = ((config.events_per_judge as f64 * config.basic_fraction).round() as usize)
        .min(config.n_vars)
        .min(config.events_per_judge);
    let complex = config.events_per_judge - basic;
    let n = config.n_vars;
    let w = &config.form_weights;
    // Distinct events available per form: symmetric forms count unordered pairs.
    let available = [n * (n - 1) / 2, n * (n - 1), n * (n - 1) / 2, n * (n - 1)]
        .iter()
        .zip(w)
        .filter(|(_, w)| **w > 0.0)
        .map(|(a, _)| a)
        .sum::<usize>();
    if complex > available {
        return Err(Error::InvalidParameter(format!(
            "{complex} complex events per judge requested but only {available} exist over {n} variables"
        )));
    }
    Ok((basic, complex))
}

fn complex_event(form: usize, a: usize, b: usize) -> EventExpr {
    let p = EventExpr::var(var_name(a));
    let q = EventExpr::var(var_name(b));
    match form {
        0 => EventExpr::and(p, q),
        1 => EventExpr::and(p, EventExpr::not(q)),
        2 => EventExpr::or(p, q),
        _ => EventExpr::or(p, EventExpr::not(q)),
    }
}

fn pick_form(rng: &mut ChaCha8Rng, w: &FormWeights) -> usize {
    let mut r = rng.random::<f64>() * w.iter().sum::<f64>();
    for (i, wi) in w.iter().enumerate() {
        if r < *wi {
            return i;
        }
        r -= wi;
    }
    w.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

pub fn generate(config: &GenConfig) -> Result<Panel> {
    let (n_basic, n_complex) = validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_vars;

    let draw_marginals =
        |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(0.1..0.9)).collect() };
    let a = draw_marginals(&mut rng);
    let world = if config.correlated {
        let b = draw_marginals(&mut rng);
        World::Mixture(a, b)
    } else {
        World::Independent(a)
    };
    let truth: TruthAssignment = match &world {
        World::Independent(m) => (0..n)
            .map(|i| (var_name(i), rng.random_bool(m[i])))
            .collect(),
        World::Mixture(a, b) => {
            let m = if rng.random_bool(0.5) { a } else { b };
            (0..n)
                .map(|i| (var_name(i), rng.random_bool(m[i])))
                .collect()
        }
    };
    let marginals = (0..n)
        .map(|i| world.prob(&EventExpr::var(var_name(i))))
        .collect();
    let noise =
        Normal::new(0.0, config.noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let mut forecasts = Vec::with_capacity(config.n_judges * config.events_per_judge);
    let width = config.n_judges.to_string().len();
    for j in 0..config.n_judges {
        let judge = format!("j{:0width$}", j + 1);
        let mut events: Vec<EventExpr> = index::sample(&mut rng, n, n_basic)
            .into_iter()
            .map(|i| EventExpr::var(var_name(i)))
            .collect();
        let mut seen: HashSet<EventKey> = HashSet::new();
        while seen.len() < n_complex {
            let form = pick_form(&mut rng, &config.form_weights);
            let pair = index::sample(&mut rng, n, 2);
            let e = complex_event(form, pair.index(0), pair.index(1));
            if seen.insert(e.canonical_key()) {
                events.push(e);
            }
        }
        for event in events {
            let p = world.prob(&event);
            let p_hat = (p + noise.sample(&mut rng)).clamp(0.0, 1.0);
            let t = event.evaluate(&truth)?;
            forecasts.push(Forecast::new(judge.clone(), event, p_hat, Some(t))?);
        }
    }
    Ok(Panel {
        forecasts,
        truth,
        marginals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pool;

    #[test]
    fn row_count_and_determinism() {
        let config = GenConfig {
            seed: 7,
            ..GenConfig::default()
        };
        let a = generate(&config).unwrap();
        assert_eq!(a.forecasts.len(), 1020);
        let b = generate(&config).unwrap();
        assert_eq!(a.forecasts, b.forecasts);
        let c = generate(&GenConfig { seed: 8, ..config }).unwrap();
        assert_ne!(a.forecasts, c.forecasts);
    }

    #[test]
    fn event_mix_per_judge() {
        let panel = generate(&GenConfig::default()).unwrap();
        let first: Vec<&Forecast> = panel
            .forecasts
            .iter()
            .filter(|f| f.judge == "j01")
            .collect();
        assert_eq!(first.len(), 34);
        let basic = first
            .iter()
            .filter(|f| matches!(f.event, EventExpr::Var(_)))
            .count();
        assert_eq!(basic, 10);
        let keys: HashSet<_> = first.iter().map(|f| f.event.canonical_key()).collect();
        assert_eq!(keys.len(), 34);
        assert!(first.iter().all(|f| f.truth.is_some()));
    }

    #[test]
    fn noiseless_judges_report_true_probabilities() {
        let panel = generate(&GenConfig {
            noise: 0.0,
            n_judges: 3,
            ..GenConfig::default()
        })
        .unwrap();
        for f in &panel.forecasts {
            let p = product_prob(&f.event, &panel.marginals);
            assert!((f.p_hat - p).abs() < 1e-15);
        }
    }

    #[test]
    fn truths_follow_the_sampled_world() {
        let panel = generate(&GenConfig::default()).unwrap();
        for f in &panel.forecasts {
            assert_eq!(f.truth, Some(f.event.evaluate(&panel.truth).unwrap()));
        }
    }

    #[test]
    fn correlated_world_marginals_are_mixtures() {
        let panel = generate(&GenConfig {
            correlated: true,
            noise: 0.0,
            n_judges: 2,
            ..GenConfig::default()
        })
        .unwrap();
        assert!(panel.marginals.iter().all(|m| (0.1..0.9).contains(m)));
        let pooled = pool(&panel.forecasts).unwrap();
        assert!(pooled.len() <= 68);
    }

    #[test]
    fn preset_scale() {
        let stck = preset("stck").unwrap();
        assert_eq!(stck.forecasts(), 1598);
        let sizes: Vec<usize> = PRESETS.iter().map(|p| p.forecasts()).collect();
        assert_eq!(sizes, [1598, 1054, 986, 1224, 578]);
        let panel = generate(&stck.config(0.15, 1)).unwrap();
        assert_eq!(panel.forecasts.len(), 1598);
    }

    #[test]
    fn invalid_parameters() {
        for config in [
            GenConfig {
                n_vars: 0,
                ..GenConfig::default()
            },
            GenConfig {
                noise: -0.1,
                ..GenConfig::default()
            },
            GenConfig {
                n_vars: 3,
                ..GenConfig::default()
            },
            GenConfig {
                form_weights: [0.0; 4],
                ..GenConfig::default()
            },
        ] {
            assert!(matches!(generate(&config), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn form_weights_restrict_forms() {
        let panel = generate(&GenConfig {
            form_weights: [1.0, 0.0, 0.0, 0.0],
            n_judges: 4,
            ..GenConfig::default()
        })
        .unwrap();
        for f in &panel.forecasts {
            let s = f.event.to_string();
            assert!(!s.contains('|') && !s.contains('!'), "{s}");
        }
    }
}
