//! Exact global coherent approximation for small instances.
//!
//! Solves `min Σ w_i (p_i − x_i)²` over every `p` induced by a probability
//! distribution on the `2^n` atoms of the joint support, by accelerated
//! projected gradient on the atom simplex. This is deliberately a different
//! route from the vertex-hull projection so the two can check each other.

use crate::error::{Error, Result};
use crate::event::{check_cap, joint_support, EventExpr};
use crate::polytope::ProbVector;

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Stop when the Frank–Wolfe duality gap falls below this. The gap bounds
    /// `‖p − p*‖²_W`, so `1e-14` pins every coordinate to about `1e-7`.
    pub gap_tol: f64,
    pub max_iters: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            gap_tol: 1e-14,
            max_iters: 500_000,
        }
    }
}

pub fn global_cap_oracle(
    events: &[EventExpr],
    weights: &[f64],
    x: &[f64],
    cap: usize,
) -> Result<ProbVector> {
    global_cap_oracle_with(events, weights, x, cap, OracleOptions::default())
}

pub fn global_cap_oracle_with(
    events: &[EventExpr],
    weights: &[f64],
    x: &[f64],
    cap: usize,
    opts: OracleOptions,
) -> Result<ProbVector> {
    let m = events.len();
    for len in [weights.len(), x.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: len,
            });
        }
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidWeight { index, value });
        }
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let vars = joint_support(events);
    let n = vars.len();
    check_cap(n, cap)?;
    let compiled: Vec<_> = events.iter().map(|e| e.compile(&vars).unwrap()).collect();
    let atoms = 1usize << n;
    // Atom-major incidence matrix: a[atom * m + i] = 1 if event i holds at atom.
    let a: Vec<f64> = (0..atoms as u64)
        .flat_map(|mask| {
            compiled
                .iter()
                .map(move |c| if c.eval(mask) { 1.0 } else { 0.0 })
        })
        .collect();

    let max_w = weights.iter().fold(0.0f64, |acc, &w| acc.max(w));
    let lipschitz = 2.0 * spectral_norm_sq(&a, m, atoms) * max_w * 1.01 + f64::MIN_POSITIVE;

    let push = |mu: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; m];
        for (atom, &weight) in mu.iter().enumerate() {
            if weight != 0.0 {
                for (pi, ai) in p.iter_mut().zip(&a[atom * m..(atom + 1) * m]) {
                    *pi += weight * ai;
                }
            }
        }
        p
    };
    let gradient = |mu: &[f64]| -> (Vec<f64>, f64) {
        let p = push(mu);
        let r: Vec<f64> = p
            .iter()
            .zip(x)
            .zip(weights)
            .map(|((p, x), w)| 2.0 * w * (p - x))
            .collect();
        let f: f64 = p
            .iter()
            .zip(x)
            .zip(weights)
            .map(|((p, x), w)| w * (p - x) * (p - x))
            .sum();
        let g = (0..atoms)
            .map(|atom| {
                a[atom * m..(atom + 1) * m]
                    .iter()
                    .zip(&r)
                    .map(|(a, r)| a * r)
                    .sum()
            })
            .collect();
        (g, f)
    };

    let mut mu = vec![1.0 / atoms as f64; atoms];
    let mut y = mu.clone();
    let mut t = 1.0f64;
    let mut gap = f64::INFINITY;
    for iter in 0..opts.max_iters {
        if iter % 8 == 0 {
            let (g, _) = gradient(&mu);
            let lin: f64 = g.iter().zip(&mu).map(|(g, m)| g * m).sum();
            let gmin = g.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
            gap = lin - gmin;
            if gap <= opts.gap_tol {
                let p = push(&mu).into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
                return ProbVector::new(p);
            }
        }
        let (g, _) = gradient(&y);
        let step: Vec<f64> = y.iter().zip(&g).map(|(y, g)| y - g / lipschitz).collect();
        let next = project_simplex(&step);
        // Restart momentum when the step points against the last move.
        let restart: f64 = y
            .iter()
            .zip(&next)
            .zip(&mu)
            .map(|((y, n), m)| (y - n) * (n - m))
            .sum();
        let t_next = if restart > 0.0 {
            1.0
        } else {
            (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0
        };
        let beta = if restart > 0.0 {
            0.0
        } else {
            (t - 1.0) / t_next
        };
        y = next
            .iter()
            .zip(&mu)
            .map(|(n, m)| n + beta * (n - m))
            .collect();
        mu = next;
        t = t_next;
    }
    Err(Error::SolverFailure {
        residual: gap,
        iterations: opts.max_iters,
    })
}

/// Largest eigenvalue of `A Aᵀ` (m × m) by power iteration.
fn spectral_norm_sq(a: &[f64], m: usize, atoms: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut gram = vec![0.0; m * m];
    for atom in 0..atoms {
        let row = &a[atom * m..(atom + 1) * m];
        for i in 0..m {
            if row[i] != 0.0 {
                for j in 0..m {
                    gram[i * m + j] += row[j];
                }
            }
        }
    }
    let mut v = vec![1.0; m];
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|j| gram[i * m + j] * v[j]).sum())
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-13 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}
