//! Per-predicate statistics: total triple count and distinct subject count.
//!
//! These are exact, computed in one pass during load, and drive the planner's
//! priority scoring. They are never estimated.

use std::collections::{BTreeMap, HashSet};

use crate::term::{TermId, Triple};

/// Counts for one predicate.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct PredicateStats {
    /// Number of triples with this predicate.
    pub triple_count: u64,
    /// Number of distinct subjects among those triples.
    pub distinct_subjects: u64,
}

impl PredicateStats {
    /// Average number of objects per subject, at least 1.
    pub fn fan_out(&self) -> f64 {
        if self.distinct_subjects == 0 {
            1.0
        } else {
            (self.triple_count as f64 / self.distinct_subjects as f64).max(1.0)
        }
    }
}

/// Statistics for every predicate present in a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    per_predicate: BTreeMap<TermId, PredicateStats>,
}

impl Stats {
    pub fn get(&self, predicate: TermId) -> Option<PredicateStats> {
        self.per_predicate.get(&predicate).copied()
    }

    /// Predicates in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (TermId, PredicateStats)> + '_ {
        self.per_predicate.iter().map(|(&p, &s)| (p, s))
    }

    pub fn len(&self) -> usize {
        self.per_predicate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_predicate.is_empty()
    }

    pub fn total_triples(&self) -> u64 {
        self.per_predicate.values().map(|s| s.triple_count).sum()
    }

    pub(crate) fn insert(&mut self, predicate: TermId, stats: PredicateStats) {
        self.per_predicate.insert(predicate, stats);
    }
}

/// Exact single-pass computation over the triple list.
pub fn compute_stats(triples: &[Triple]) -> Stats {
    let mut counts: BTreeMap<TermId, (u64, HashSet<TermId>)> = BTreeMap::new();
    for t in triples {
        let entry = counts.entry(t.predicate).or_default();
        entry.0 += 1;
        entry.1.insert(t.subject);
    }
    let mut stats = Stats::default();
    for (p, (count, subjects)) in counts {
        stats.insert(
            p,
            PredicateStats {
                triple_count: count,
                distinct_subjects: subjects.len() as u64,
            },
        );
    }
    stats
}
