//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::time::Instant;

use capagg_core::engine::{aggregate, design_subsets, pool};
use capagg_core::scoring::{evaluate_cases, run_pipeline, Case};
use capagg_core::synth::{generate, GenConfig, PRESETS};
use capagg_core::{
    build_polytope, global_cap_oracle, project_onto, EngineConfig, EventExpr, Forecast, Method,
    Strategy, TruthAssignment,
};
use common::{random_events, random_panel, truth_table, weighted_brier};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(name: &str, start: Instant, outcome: Outcome) -> bool {
    println!(
        "{} {name}: {} [{:.2}s]",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
    outcome.pass
}

fn theorem_two() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut checks = 0usize;
    let start = Instant::now();
    for _ in 0..200 {
        let events = random_events(&mut rng, 10, 40);
        let judges = rng.random_range(1..=5);
        let panel = random_panel(&mut rng, &events, judges);
        let pooled = pool(&panel).unwrap();
        let design = design_subsets(&pooled, Strategy::Neighborhood, 20).unwrap();
        let config = EngineConfig {
            keep_iterates: true,
            ..Default::default()
        };
        let r = aggregate(&pooled, &design, &config).unwrap();
        let w = pooled.weights();
        let table = truth_table(&pooled.events());
        let mut prev: Vec<f64> = table
            .iter()
            .map(|t| weighted_brier(&r.input, t, &w))
            .collect();
        for q in r.iterates.as_ref().unwrap() {
            for (t, p) in table.iter().zip(prev.iter_mut()) {
                let b = weighted_brier(q, t, &w);
                worst = worst.max(b - *p);
                if b > *p + 1e-9 {
                    violations += 1;
                }
                *p = b;
                checks += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: violations == 0 && secs < 60.0,
        detail: format!(
            "200 instances, {checks} (sweep, assignment) checks, {violations} violations, largest increase {worst:.2e}"
        ),
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_dykstra = 0.0f64;
    let mut worst_cyclic = 0.0f64;
    let start = Instant::now();
    for _ in 0..100 {
        let events = random_events(&mut rng, 4, 12);
        let judges = rng.random_range(1..=4);
        let panel = random_panel(&mut rng, &events, judges);
        let pooled = pool(&panel).unwrap();
        let design = design_subsets(&pooled, Strategy::Global, 20).unwrap();
        let oracle =
            global_cap_oracle(&pooled.events(), &pooled.weights(), &pooled.means(), 20).unwrap();
        for (method, worst) in [
            (Method::Dykstra, &mut worst_dykstra),
            (Method::Cyclic, &mut worst_cyclic),
        ] {
            let config = EngineConfig {
                method,
                ..Default::default()
            };
            let r = aggregate(&pooled, &design, &config).unwrap();
            for (a, b) in r.final_probs.iter().zip(oracle.iter()) {
                *worst = worst.max((a - b).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst_dykstra <= 1e-5 && worst_cyclic <= 1e-5 && secs < 120.0,
        detail: format!(
            "100 instances, max deviation dykstra {worst_dykstra:.2e}, cyclic {worst_cyclic:.2e}"
        ),
    }
}

/// Distinct truth vectors, computed directly from the expressions.
fn vertices(events: &[EventExpr]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for t in truth_table(events) {
        let v: Vec<f64> = t.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn kkt_certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    let mut calls = 0usize;
    let mut failures = 0usize;
    for _ in 0..500 {
        let events = random_events(&mut rng, 5, 8);
        let w: Vec<f64> = events
            .iter()
            .map(|_| rng.random_range(1..=6) as f64)
            .collect();
        let poly = build_polytope(&events, &w, 20).unwrap();
        let verts = vertices(&events);
        for _ in 0..6 {
            let x: Vec<f64> = events.iter().map(|_| rng.random_range(-0.2..1.2)).collect();
            calls += 1;
            let Ok(p) = project_onto(&poly, &x) else {
                failures += 1;
                continue;
            };
            let r: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
            for v in &verts {
                let vi: f64 = (0..x.len()).map(|i| w[i] * r[i] * (v[i] - p[i])).sum();
                worst = worst.max(vi);
            }
        }
    }
    Outcome {
        pass: failures == 0 && worst <= 1e-9,
        detail: format!(
            "{calls} projections, {failures} solver failures, max <x-p, v-p>_W = {worst:.2e}"
        ),
    }
}

/// Probability of `event` under a joint distribution given by atom weights.
fn joint_prob(event: &EventExpr, vars: &[String], atoms: &[f64]) -> f64 {
    atoms
        .iter()
        .enumerate()
        .filter(|(m, _)| {
            let t: TruthAssignment = vars
                .iter()
                .enumerate()
                .map(|(k, v)| (v.clone(), m >> k & 1 == 1))
                .collect();
            event.evaluate(&t).unwrap()
        })
        .map(|(_, p)| p)
        .sum()
}

fn linear_averaging() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0usize;
    let mut extra_sweeps = 0usize;
    for _ in 0..100 {
        let events = random_events(&mut rng, 6, 20);
        let vars = capagg_core::event::joint_support(&events);
        let mut panel = Vec::new();
        for j in 0..rng.random_range(2..=6) {
            let raw: Vec<f64> = (0..1usize << vars.len())
                .map(|_| rng.random::<f64>())
                .collect();
            let total: f64 = raw.iter().sum();
            let atoms: Vec<f64> = raw.iter().map(|a| a / total).collect();
            for e in &events {
                let p = joint_prob(e, &vars, &atoms).clamp(0.0, 1.0);
                panel.push(Forecast::new(format!("j{j}"), e.clone(), p, None).unwrap());
            }
        }
        let (pooled, r) =
            run_pipeline(&panel, Strategy::Neighborhood, &EngineConfig::default()).unwrap();
        if r.final_probs.as_ref() as &[f64] != pooled.means().as_slice() {
            mismatches += 1;
        }
        if r.iterations_run != 1 {
            extra_sweeps += 1;
        }
    }
    Outcome {
        pass: mismatches == 0 && extra_sweeps == 0,
        detail: format!("100 coherent panels, {mismatches} outputs differ from the pooled means, {extra_sweeps} needed more than one sweep"),
    }
}

fn convergence_shape() -> Outcome {
    let seeds = 20;
    let mut pass = true;
    let mut parts = Vec::new();
    for preset in PRESETS {
        let mut within = 0;
        let mut sweeps = Vec::new();
        let mut pooled_sizes = Vec::new();
        for seed in 1..=seeds {
            let panel = generate(&preset.config(0.15, seed)).unwrap();
            let config = EngineConfig {
                max_sweeps: 200,
                tol: 1e-7,
                ..Default::default()
            };
            let (pooled, r) =
                run_pipeline(&panel.forecasts, Strategy::Neighborhood, &config).unwrap();
            pooled_sizes.push(pooled.len());
            if r.converged && r.iterations_run <= 10 {
                within += 1;
            }
            sweeps.push(r.iterations_run);
        }
        sweeps.sort_unstable();
        let share = within as f64 / seeds as f64;
        pass &= share >= 0.9;
        parts.push(format!(
            "{} ({} forecasts, ~{} pooled): {}/{} within 10, median {} sweeps",
            preset.name,
            preset.forecasts(),
            pooled_sizes.iter().sum::<usize>() / pooled_sizes.len(),
            within,
            seeds,
            sweeps[sweeps.len() / 2]
        ));
    }
    Outcome {
        pass,
        detail: format!("tol 1e-7, noise 0.15; {}", parts.join("; ")),
    }
}

fn scalability() -> Outcome {
    let ten_sweeps = EngineConfig {
        max_sweeps: 10,
        tol: 0.0,
        ..Default::default()
    };
    let stck = generate(&PRESETS[0].config(0.15, 1)).unwrap();
    let start = Instant::now();
    let (pooled_a, ra) =
        run_pipeline(&stck.forecasts, Strategy::Neighborhood, &ten_sweeps).unwrap();
    let t_a = start.elapsed().as_secs_f64();

    // Enough judges over 30 variables that the pooled set itself reaches 1598 events.
    let large = generate(&GenConfig {
        n_vars: 30,
        n_judges: 110,
        seed: 1,
        ..GenConfig::default()
    })
    .unwrap();
    let start = Instant::now();
    let (pooled_b, rb) =
        run_pipeline(&large.forecasts, Strategy::Neighborhood, &ten_sweeps).unwrap();
    let t_b = start.elapsed().as_secs_f64();

    let worst = t_a.max(t_b);
    Outcome {
        pass: worst < 10.0 && pooled_b.len() >= 1598 && ra.iterations_run == 10 && rb.iterations_run == 10,
        detail: format!(
            "STCK panel {} forecasts / {} pooled: {:.3}s; {} forecasts / {} pooled: {:.3}s; 1s target {}",
            stck.forecasts.len(),
            pooled_a.len(),
            t_a,
            large.forecasts.len(),
            pooled_b.len(),
            t_b,
            if worst < 1.0 { "met" } else { "missed" }
        ),
    }
}

fn accuracy_ordering() -> Outcome {
    let mut ordered = 0;
    let mut curve_breaks = 0;
    let config = EngineConfig {
        max_sweeps: 10,
        ..Default::default()
    };
    for seed in 1..=100 {
        let panel = generate(&GenConfig {
            seed,
            ..GenConfig::default()
        })
        .unwrap();
        let reports = evaluate_cases(&panel.forecasts, Strategy::Neighborhood, &config).unwrap();
        let score = |c: Case| reports.iter().find(|r| r.case == c).unwrap().forecast_brier;
        let (raw, ind, agg) = (
            score(Case::Raw),
            score(Case::Individual),
            score(Case::Aggregate),
        );
        if agg <= ind && ind <= raw {
            ordered += 1;
        }
        let (_, r) = run_pipeline(&panel.forecasts, Strategy::Neighborhood, &config).unwrap();
        let mut prev = r.initial_brier.unwrap();
        for s in &r.sweeps {
            let b = s.brier.unwrap();
            if b > prev + 1e-9 {
                curve_breaks += 1;
            }
            prev = b;
        }
    }
    Outcome {
        pass: ordered >= 95 && curve_breaks == 0,
        detail: format!("aggregate <= individual <= raw on {ordered}/100 seeds; {curve_breaks} non-monotone curve steps"),
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("theorem-2 monotonicity", theorem_two),
        ("oracle equivalence", oracle_equivalence),
        ("projection KKT certificates", kkt_certificates),
        ("linear-averaging specialization", linear_averaging),
        ("convergence within 10 sweeps", convergence_shape),
        ("scalability", scalability),
        ("accuracy ordering", accuracy_ordering),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        if !report(name, start, run()) {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
