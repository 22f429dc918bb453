//! Dykstra's alternating projection onto an intersection of coherence sets.
//!
//! Each set constrains a slice of a shared vector through an index map. The
//! correction vector kept per set makes the iteration converge to the
//! weighted projection onto the intersection rather than just some point of it.

use crate::error::{Error, Result};
use crate::polytope::{ProbVector, VertexPolytope};

#[derive(Clone, Debug)]
pub struct IndexedPolytope {
    pub polytope: VertexPolytope,
    /// Position in the shared vector of each polytope coordinate.
    pub indices: Vec<usize>,
}

impl IndexedPolytope {
    pub fn new(polytope: VertexPolytope, indices: Vec<usize>) -> Result<Self> {
        if indices.len() != polytope.dim() {
            return Err(Error::DimensionMismatch {
                expected: polytope.dim(),
                got: indices.len(),
            });
        }
        Ok(IndexedPolytope { polytope, indices })
    }
}

/// Weighted projection of `x` onto the intersection of `sets`.
///
/// Stops once a full sweep moves no coordinate of the iterate or of any
/// correction vector by more than `tol`.
pub fn project_onto_dykstra(
    sets: &[IndexedPolytope],
    x: &[f64],
    max_sweeps: usize,
    tol: f64,
) -> Result<ProbVector> {
    validate(sets, x.len())?;
    let mut q = x.to_vec();
    let mut corrections: Vec<Vec<f64>> = sets.iter().map(|s| vec![0.0; s.indices.len()]).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps.max(1) {
        residual = 0.0f64;
        for (set, corr) in sets.iter().zip(corrections.iter_mut()) {
            let y: Vec<f64> = set
                .indices
                .iter()
                .zip(corr.iter())
                .map(|(&i, c)| q[i] + c)
                .collect();
            let p = set.polytope.project(&y)?.point;
            for (k, &i) in set.indices.iter().enumerate() {
                let new_corr = y[k] - p[k];
                residual = residual
                    .max((p[k] - q[i]).abs())
                    .max((new_corr - corr[k]).abs());
                corr[k] = new_corr;
                q[i] = p[k];
            }
        }
        if residual <= tol {
            return ProbVector::new(q);
        }
    }
    Err(Error::NonConvergence {
        sweeps: max_sweeps,
        residual,
    })
}

/// Index bounds and agreement of weights on shared coordinates.
pub(crate) fn validate(sets: &[IndexedPolytope], len: usize) -> Result<()> {
    let mut seen: Vec<Option<f64>> = vec![None; len];
    for set in sets {
        for (k, &i) in set.indices.iter().enumerate() {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            let w = set.polytope.weights()[k];
            match seen[i] {
                Some(prev) if prev != w => {
                    return Err(Error::InvalidParameter(format!(
                        "coordinate {i} carries weights {prev} and {w} in different sets"
                    )))
                }
                _ => seen[i] = Some(w),
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{parse_event, DEFAULT_SUPPORT_CAP};
    use crate::polytope::{build_polytope, project_onto};

    fn indexed(list: &[&str], indices: Vec<usize>) -> IndexedPolytope {
        let events: Vec<_> = list.iter().map(|s| parse_event(s).unwrap()).collect();
        let poly = build_polytope(&events, &vec![1.0; events.len()], DEFAULT_SUPPORT_CAP).unwrap();
        IndexedPolytope::new(poly, indices).unwrap()
    }

    #[test]
    fn single_set_matches_direct_projection() {
        let set = indexed(&["p", "q", "p & q"], vec![0, 1, 2]);
        let x = [0.95, 0.0, 0.6];
        let direct = project_onto(&set.polytope, &x).unwrap();
        let dyk = project_onto_dykstra(&[set], &x, 10, 1e-12).unwrap();
        assert_eq!(&*direct, &*dyk);
    }

    #[test]
    fn member_point_is_unchanged() {
        let sets = [
            indexed(&["p", "!p"], vec![0, 1]),
            indexed(&["p", "q", "p & q"], vec![0, 2, 3]),
        ];
        let x = [0.4, 0.6, 0.5, 0.2];
        assert_eq!(&*project_onto_dykstra(&sets, &x, 5, 1e-12).unwrap(), &x);
    }

    #[test]
    fn negation_pair_with_boxes() {
        let sets = [
            indexed(&["p", "!p"], vec![0, 1]),
            indexed(&["p"], vec![0]),
            indexed(&["!p"], vec![1]),
        ];
        let p = project_onto_dykstra(&sets, &[0.7, 0.5], 50, 1e-12).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-12 && (p[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let sets = [
            indexed(&["p", "!p"], vec![0, 1]),
            indexed(&["p", "q", "p & q"], vec![0, 2, 3]),
            indexed(&["q", "!q"], vec![2, 4]),
        ];
        let err = project_onto_dykstra(&sets, &[0.9, 0.6, 0.1, 0.7, 0.3], 1, 1e-15).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { sweeps: 1, .. }));
    }

    #[test]
    fn rejects_inconsistent_weights_and_indices() {
        let a = indexed(&["p"], vec![0]);
        let events = vec![parse_event("p").unwrap()];
        let heavy =
            IndexedPolytope::new(build_polytope(&events, &[2.0], 20).unwrap(), vec![0]).unwrap();
        assert!(matches!(
            project_onto_dykstra(&[a.clone(), heavy], &[0.5], 5, 1e-9),
            Err(Error::InvalidParameter(_))
        ));
        let far = indexed(&["p"], vec![3]);
        assert!(matches!(
            project_onto_dykstra(&[far], &[0.5], 5, 1e-9),
            Err(Error::IndexOutOfRange { index: 3, len: 1 })
        ));
    }
}
