//! Choosing the index subsets whose local coherence the engine enforces.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::config::Strategy;
use crate::error::{Error, Result};
use crate::event::{check_cap, joint_support, EventExpr};

use super::pool::PooledForecastSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignName {
    Singleton,
    Neighborhood,
    Global,
    Custom,
}

impl From<Strategy> for DesignName {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Singleton => DesignName::Singleton,
            Strategy::Neighborhood => DesignName::Neighborhood,
            Strategy::Global => DesignName::Global,
        }
    }
}

impl fmt::Display for DesignName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignName::Singleton => "singleton",
            DesignName::Neighborhood => "neighborhood",
            DesignName::Global => "global",
            DesignName::Custom => "custom",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetDesign {
    pub name: DesignName,
    /// Index sets over pooled entries, in sweep order. Each is sorted.
    pub subsets: Vec<Vec<usize>>,
}

impl SubsetDesign {
    /// A user-supplied design; every entry in `0..len` must be covered.
    pub fn custom(subsets: Vec<Vec<usize>>, len: usize) -> Result<Self> {
        let design = SubsetDesign {
            name: DesignName::Custom,
            subsets,
        };
        design.validate(len)?;
        Ok(design)
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        let mut covered = vec![false; len];
        for s in &self.subsets {
            if s.is_empty() {
                return Err(Error::InvalidParameter("empty subset".into()));
            }
            let mut seen = HashSet::new();
            for &i in s {
                if i >= len {
                    return Err(Error::IndexOutOfRange { index: i, len });
                }
                if !seen.insert(i) {
                    return Err(Error::InvalidParameter(format!(
                        "index {i} repeated in a subset"
                    )));
                }
                covered[i] = true;
            }
        }
        match covered.iter().position(|c| !c) {
            Some(i) => Err(Error::UncoveredEntry(i)),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

/// Build a named design.
///
/// `neighborhood` visits, in order: each complementary pair `{E, ¬E}`; each
/// entry whose top connective (after pushing negations inward) is `∧` or `∨`,
/// grouped with the pooled entries equal to its two arguments; and a
/// singleton for every entry still uncovered.
pub fn design_subsets(
    pooled: &PooledForecastSet,
    strategy: Strategy,
    cap: usize,
) -> Result<SubsetDesign> {
    let m = pooled.len();
    let subsets = match strategy {
        Strategy::Singleton => (0..m).map(|i| vec![i]).collect(),
        Strategy::Global => vec![(0..m).collect()],
        Strategy::Neighborhood => neighborhood(pooled),
    };
    let design = SubsetDesign {
        name: strategy.into(),
        subsets,
    };
    let events = pooled.events();
    for s in &design.subsets {
        let support = joint_support(s.iter().map(|&i| &events[i]));
        check_cap(support.len(), cap)?;
    }
    Ok(design)
}

fn neighborhood(pooled: &PooledForecastSet) -> Vec<Vec<usize>> {
    let entries = pooled.entries();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut push = |s: Vec<usize>, subsets: &mut Vec<Vec<usize>>| {
        if seen.insert(s.clone()) {
            subsets.push(s);
        }
    };

    for (i, e) in entries.iter().enumerate() {
        let complement = EventExpr::not(e.event.clone()).canonical_key();
        if let Some(j) = pooled.position(&complement) {
            if j > i {
                push(vec![i, j], &mut subsets);
            }
        }
    }

    for (i, e) in entries.iter().enumerate() {
        let Some((_, left, right)) = e.event.split_binary() else {
            continue;
        };
        let mut s = vec![i];
        for arg in [left, right] {
            if let Some(j) = pooled.position(&arg.canonical_key()) {
                if !s.contains(&j) {
                    s.push(j);
                }
            }
        }
        if s.len() > 1 {
            s.sort_unstable();
            push(s, &mut subsets);
        }
    }

    let mut covered = vec![false; entries.len()];
    for s in &subsets {
        for &i in s {
            covered[i] = true;
        }
    }
    for (i, c) in covered.into_iter().enumerate() {
        if !c {
            push(vec![i], &mut subsets);
        }
    }
    subsets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pool::pool;
    use crate::event::parse_event;
    use crate::forecast::Forecast;

    fn pooled(events: &[&str]) -> PooledForecastSet {
        let fs: Vec<Forecast> = events
            .iter()
            .map(|e| Forecast::new("j", parse_event(e).unwrap(), 0.5, None).unwrap())
            .collect();
        pool(&fs).unwrap()
    }

    #[test]
    fn neighborhood_groups_conjunction_with_conjuncts() {
        let d = design_subsets(&pooled(&["p", "q", "p & q"]), Strategy::Neighborhood, 20).unwrap();
        assert_eq!(d.subsets, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn neighborhood_groups_negation_pairs() {
        let d = design_subsets(&pooled(&["p", "!p"]), Strategy::Neighborhood, 20).unwrap();
        assert_eq!(d.subsets, vec![vec![0, 1]]);
    }

    #[test]
    fn singleton_design() {
        let d = design_subsets(&pooled(&["p", "q"]), Strategy::Singleton, 20).unwrap();
        assert_eq!(d.subsets, vec![vec![0], vec![1]]);
        assert_eq!(d.name, DesignName::Singleton);
    }

    #[test]
    fn global_design_and_cap() {
        let p = pooled(&["a & b", "c | d", "e"]);
        let d = design_subsets(&p, Strategy::Global, 20).unwrap();
        assert_eq!(d.subsets, vec![vec![0, 1, 2]]);
        assert!(matches!(
            design_subsets(&p, Strategy::Global, 4),
            Err(Error::SupportTooLarge { size: 5, cap: 4 })
        ));
    }

    #[test]
    fn neighborhood_order_and_closure() {
        // 0:p 1:!q 2:p & !q 3:q 4:r 5:!p
        let p = pooled(&["p", "!q", "p & !q", "q", "r", "!p"]);
        let d = design_subsets(&p, Strategy::Neighborhood, 20).unwrap();
        assert_eq!(
            d.subsets,
            vec![vec![0, 5], vec![1, 3], vec![0, 1, 2], vec![4]]
        );
        d.validate(p.len()).unwrap();
    }

    #[test]
    fn negated_connectives_split_by_de_morgan() {
        // !(p & q) = !p | !q groups with !p and !q.
        let p = pooled(&["!(p & q)", "!p", "!q"]);
        let d = design_subsets(&p, Strategy::Neighborhood, 20).unwrap();
        assert_eq!(d.subsets, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn custom_designs_are_validated() {
        assert!(SubsetDesign::custom(vec![vec![0], vec![1, 2]], 3).is_ok());
        assert!(matches!(
            SubsetDesign::custom(vec![vec![0]], 2),
            Err(Error::UncoveredEntry(1))
        ));
        assert!(matches!(
            SubsetDesign::custom(vec![vec![0, 5]], 2),
            Err(Error::IndexOutOfRange { index: 5, len: 2 })
        ));
        assert!("clique".parse::<Strategy>().is_err());
    }
}
