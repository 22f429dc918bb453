//! Coherence polytopes and weighted least-squares projection onto them.
//!
//! A list of events is coherent at `x` exactly when `x` lies in the convex
//! hull of the 0/1 truth-indicator vectors the events take over all truth
//! assignments of their joint support. Projections are taken in the
//! weighted norm `‖c‖²_W = Σ w_i c_i²`.
//!
//! Two solvers sit behind [`VertexPolytope::project`]:
//!
//! * hulls with at most four affinely independent vertices (every subset the
//!   neighborhood design produces: segments, triangles, conjunction and
//!   disjunction tetrahedra) are solved in closed form by enumerating faces;
//! * anything else goes through Wolfe's minimum-norm-point active-set method.
//!
//! Every projection is checked against the variational inequality
//! `⟨x − P, v − P⟩_W ≤ KKT_TOL` over all vertices before it is returned.

use std::collections::HashMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::config::{KKT_TOL, SNAP_TOL};
use crate::error::{Error, Result};
use crate::event::{check_cap, joint_support, EventExpr};
use crate::linalg::{solve, wdot};

const MAX_FACE_VERTICES: usize = 4;
const WOLFE_MAX_ITERS: usize = 10_000;
const WOLFE_ALPHA_MIN: f64 = 1e-12;
const WOLFE_LAMBDA_MIN: f64 = 1e-13;

/// Probabilities, one per event, each in `[0, 1]` up to `1e-12`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(Error::ProbabilityOutOfRange { value: v });
            }
        }
        Ok(ProbVector(values))
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ProbVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug)]
pub struct VertexPolytope {
    events: Vec<EventExpr>,
    vertices: Vec<Vec<f64>>,
    weights: Vec<f64>,
    small_simplex: bool,
}

/// Result of a projection with its convex-combination certificate.
#[derive(Clone, Debug)]
pub struct Projection {
    pub point: ProbVector,
    /// `(vertex index, coefficient)` pairs; coefficients are positive and sum to one.
    pub barycentric: Vec<(usize, f64)>,
    /// `max_v ⟨x − P, v − P⟩_W` over all vertices.
    pub kkt_residual: f64,
}

pub fn build_polytope(events: &[EventExpr], weights: &[f64], cap: usize) -> Result<VertexPolytope> {
    if weights.len() != events.len() {
        return Err(Error::DimensionMismatch {
            expected: events.len(),
            got: weights.len(),
        });
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidWeight { index, value });
        }
    }
    let vars = joint_support(events);
    let n = vars.len();
    check_cap(n, cap)?;
    let compiled: Vec<_> = events
        .iter()
        .map(|e| e.compile(&vars).expect("joint support covers every event"))
        .collect();

    let mut seen: HashMap<Vec<bool>, ()> = HashMap::new();
    let mut vertices = Vec::new();
    for mask in 0..1u64 << n {
        let pattern: Vec<bool> = compiled.iter().map(|c| c.eval(mask)).collect();
        if seen.insert(pattern.clone(), ()).is_none() {
            vertices.push(pattern.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect());
        }
    }
    let small_simplex = vertices.len() <= MAX_FACE_VERTICES && affinely_independent(&vertices);
    Ok(VertexPolytope {
        events: events.to_vec(),
        vertices,
        weights: weights.to_vec(),
        small_simplex,
    })
}

fn affinely_independent(vertices: &[Vec<f64>]) -> bool {
    let k = vertices.len();
    if k <= 1 {
        return true;
    }
    let v0 = &vertices[0];
    let diffs: Vec<Vec<f64>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(v0).map(|(a, b)| a - b).collect())
        .collect();
    let m = k - 1;
    let ones = vec![1.0; v0.len()];
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            gram[i * m + j] = wdot(&ones, &diffs[i], &diffs[j]);
        }
    }
    solve(gram, vec![0.0; m]).is_some()
}

impl VertexPolytope {
    pub fn events(&self) -> &[EventExpr] {
        &self.events
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.events.len()
    }

    /// Whether the closed-form face enumeration applies.
    pub fn is_small_simplex(&self) -> bool {
        self.small_simplex
    }

    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        self.check_input(x)?;
        let coeffs = if self.small_simplex {
            self.project_faces(x)
        } else {
            self.project_wolfe(x)?
        };
        self.finish(x, coeffs)
    }

    /// Projection through the generic active-set solver, skipping closed forms.
    pub fn project_generic(&self, x: &[f64]) -> Result<Projection> {
        self.check_input(x)?;
        let coeffs = self.project_wolfe(x)?;
        self.finish(x, coeffs)
    }

    /// `max_v ⟨x − p, v − p⟩_W`; non-positive exactly when `p` is the projection of `x`.
    pub fn kkt_residual(&self, x: &[f64], p: &[f64]) -> f64 {
        let r: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
        self.vertices
            .iter()
            .map(|v| {
                self.weights
                    .iter()
                    .zip(&r)
                    .zip(v.iter().zip(p))
                    .map(|((w, r), (v, p))| w * r * (v - p))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    fn finish(&self, x: &[f64], coeffs: Vec<(usize, f64)>) -> Result<Projection> {
        let mut point = vec![0.0; self.dim()];
        for &(t, c) in &coeffs {
            for (p, v) in point.iter_mut().zip(&self.vertices[t]) {
                *p += c * v;
            }
        }
        for p in &mut point {
            *p = p.clamp(0.0, 1.0);
        }
        let kkt_residual = self.kkt_residual(x, &point);
        if kkt_residual > KKT_TOL {
            return Err(Error::SolverFailure {
                residual: kkt_residual,
                iterations: WOLFE_MAX_ITERS,
            });
        }
        let near = x.iter().zip(&point).all(|(a, b)| (a - b).abs() <= SNAP_TOL);
        let point = if near { x.to_vec() } else { point };
        Ok(Projection {
            point: ProbVector::new(point)?,
            barycentric: coeffs,
            kkt_residual,
        })
    }

    /// Coefficients of the weighted projection of `x` onto the affine hull of `idx`.
    fn affine_coords(&self, idx: &[usize], x: &[f64]) -> Option<Vec<f64>> {
        let v0 = &self.vertices[idx[0]];
        let m = idx.len() - 1;
        let diffs: Vec<Vec<f64>> = idx[1..]
            .iter()
            .map(|&t| {
                self.vertices[t]
                    .iter()
                    .zip(v0)
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        let rhs_vec: Vec<f64> = x.iter().zip(v0).map(|(a, b)| a - b).collect();
        let w = &self.weights;
        let mut gram = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                gram[i * m + j] = wdot(w, &diffs[i], &diffs[j]);
            }
            rhs[i] = wdot(w, &diffs[i], &rhs_vec);
        }
        let beta = solve(gram, rhs)?;
        let mut alpha = Vec::with_capacity(idx.len());
        alpha.push(1.0 - beta.iter().sum::<f64>());
        alpha.extend(beta);
        Some(alpha)
    }

    fn project_faces(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let k = self.vertices.len();
        if k == 1 {
            return vec![(0, 1.0)];
        }
        if k == 2 {
            return self.project_segment(x);
        }
        let w = &self.weights;
        let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
        for mask in 1u32..1 << k {
            let idx: Vec<usize> = (0..k).filter(|t| mask >> t & 1 == 1).collect();
            let Some(alpha) = self.affine_coords(&idx, x) else {
                continue;
            };
            if alpha.iter().any(|&a| a < -1e-12) {
                continue;
            }
            let total: f64 = alpha.iter().map(|a| a.max(0.0)).sum();
            let coeffs: Vec<(usize, f64)> = idx
                .iter()
                .zip(&alpha)
                .map(|(&t, &a)| (t, a.max(0.0) / total))
                .collect();
            let mut diff = x.to_vec();
            for &(t, c) in &coeffs {
                for (d, v) in diff.iter_mut().zip(&self.vertices[t]) {
                    *d -= c * v;
                }
            }
            let dist = wdot(w, &diff, &diff);
            if best.as_ref().is_none_or(|(b, _)| dist < *b) {
                best = Some((dist, coeffs));
            }
        }
        let (_, coeffs) = best.expect("vertex faces are always feasible");
        coeffs.into_iter().filter(|&(_, c)| c > 0.0).collect()
    }

    /// Closed form for a two-vertex hull: `t = clamp(⟨x − a, b − a⟩_W / ‖b − a‖²_W, 0, 1)`.
    fn project_segment(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let (a, b) = (&self.vertices[0], &self.vertices[1]);
        let w = &self.weights;
        let ba: Vec<f64> = b.iter().zip(a).map(|(b, a)| b - a).collect();
        let xa: Vec<f64> = x.iter().zip(a).map(|(x, a)| x - a).collect();
        let t = (wdot(w, &xa, &ba) / wdot(w, &ba, &ba)).clamp(0.0, 1.0);
        if t == 0.0 {
            vec![(0, 1.0)]
        } else if t == 1.0 {
            vec![(1, 1.0)]
        } else {
            vec![(0, 1.0 - t), (1, t)]
        }
    }

    /// Wolfe's minimum-norm-point algorithm on the translated points `v_t − x`.
    fn project_wolfe(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        let w = &self.weights;
        let u: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(x).map(|(v, x)| v - x).collect())
            .collect();
        let norms: Vec<f64> = u.iter().map(|u| wdot(w, u, u)).collect();
        let scale = norms.iter().fold(1.0f64, |m, &v| m.max(v));
        let start = argmin(&norms);

        let mut corral = vec![start];
        let mut lambda = vec![1.0];
        let mut y = u[start].clone();
        for _ in 0..WOLFE_MAX_ITERS {
            let yy = wdot(w, &y, &y);
            let dots: Vec<f64> = u.iter().map(|u| wdot(w, &y, u)).collect();
            let j = argmin(&dots);
            if yy - dots[j] <= 1e-14 * scale || corral.contains(&j) {
                return Ok(corral.into_iter().zip(lambda).collect());
            }
            corral.push(j);
            lambda.push(0.0);

            loop {
                let Some(alpha) = affine_minimizer(&u, &corral, w) else {
                    // Numerically dependent corral: drop the newcomer and stop.
                    corral.pop();
                    lambda.pop();
                    return Ok(corral.into_iter().zip(lambda).collect());
                };
                if alpha.iter().all(|&a| a > WOLFE_ALPHA_MIN) {
                    lambda = alpha;
                    break;
                }
                let mut theta = 1.0f64;
                for (l, a) in lambda.iter().zip(&alpha) {
                    if *a <= WOLFE_ALPHA_MIN && l - a > 0.0 {
                        theta = theta.min(l / (l - a));
                    }
                }
                for (l, a) in lambda.iter_mut().zip(&alpha) {
                    *l = theta * a + (1.0 - theta) * *l;
                }
                let drop_at = if lambda.iter().any(|&l| l <= WOLFE_LAMBDA_MIN) {
                    None
                } else {
                    Some(argmin(&lambda))
                };
                let mut keep_c = Vec::with_capacity(corral.len());
                let mut keep_l = Vec::with_capacity(corral.len());
                for (i, (&c, &l)) in corral.iter().zip(&lambda).enumerate() {
                    let dropped = match drop_at {
                        Some(d) => i == d,
                        None => l <= WOLFE_LAMBDA_MIN,
                    };
                    if !dropped {
                        keep_c.push(c);
                        keep_l.push(l);
                    }
                }
                let total: f64 = keep_l.iter().sum();
                corral = keep_c;
                lambda = keep_l.into_iter().map(|l| l / total).collect();
            }

            y = vec![0.0; x.len()];
            for (&c, &l) in corral.iter().zip(&lambda) {
                for (yi, ui) in y.iter_mut().zip(&u[c]) {
                    *yi += l * ui;
                }
            }
        }
        let coeffs: Vec<(usize, f64)> = corral.into_iter().zip(lambda).collect();
        let mut p = vec![0.0; x.len()];
        for &(t, c) in &coeffs {
            for (pi, vi) in p.iter_mut().zip(&self.vertices[t]) {
                *pi += c * vi;
            }
        }
        Err(Error::SolverFailure {
            residual: self.kkt_residual(x, &p),
            iterations: WOLFE_MAX_ITERS,
        })
    }
}

/// Lowest index attaining the minimum.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Affine weights of the minimum-norm point in the affine hull of `u[corral]`.
fn affine_minimizer(u: &[Vec<f64>], corral: &[usize], w: &[f64]) -> Option<Vec<f64>> {
    let k = corral.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let u0 = &u[corral[0]];
    let diffs: Vec<Vec<f64>> = corral[1..]
        .iter()
        .map(|&c| u[c].iter().zip(u0).map(|(a, b)| a - b).collect())
        .collect();
    let m = k - 1;
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in i..m {
            let g = wdot(w, &diffs[i], &diffs[j]);
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
        rhs[i] = -wdot(w, &diffs[i], u0);
    }
    let beta = solve(gram, rhs)?;
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    Some(alpha)
}

/// Weighted least-squares projection of `x` onto the hull.
pub fn project_onto(poly: &VertexPolytope, x: &[f64]) -> Result<ProbVector> {
    Ok(poly.project(x)?.point)
}

/// Whether `x` is within Euclidean distance `tol` of the hull.
pub fn is_coherent(poly: &VertexPolytope, x: &[f64], tol: f64) -> Result<bool> {
    Ok(distance_to(poly, x)? <= tol)
}

/// Euclidean distance from `x` to its weighted projection.
pub fn distance_to(poly: &VertexPolytope, x: &[f64]) -> Result<f64> {
    let p = poly.project(x)?.point;
    Ok(x.iter()
        .zip(p.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}
