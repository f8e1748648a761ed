//! Benchmark harness comparing strategies on a query workload.
//!
//! Correctness gates timing: a query's strategies must agree on result
//! cardinality before any number is reported. The first run per strategy is
//! discarded as warm-up whenever at least two runs are requested.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::dataset::Dataset;
use crate::executor::run_query;
use crate::planner::{explain, Strategy};
use crate::sparql::BgpQuery;
use crate::storage::fnv1a64;

/// A query entering the harness, tagged with its workload shape letter
/// (C, F, L or S; '?' when unknown).
#[derive(Debug, Clone)]
pub struct BenchQuery {
    pub id: String,
    pub shape: char,
    pub query: BgpQuery,
}

/// One report row: a (query, strategy) pair with its mean wall time over the
/// timed (non-warm-up) runs.
#[derive(Debug, Clone)]
pub struct BenchEntry {
    pub query_id: String,
    pub shape: char,
    pub strategy: Strategy,
    /// Number of timed runs aggregated into `wall_ms`.
    pub timed_runs: usize,
    pub wall_ms: f64,
    pub joins: usize,
    pub rows: usize,
    pub plan_hash: String,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub entries: Vec<BenchEntry>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("strategies disagree on {query_id}: cardinalities {details}")]
    CardinalityMismatch { query_id: String, details: String },
}

impl BenchReport {
    /// Fixed column layout:
    /// `query_id,shape,strategy,run_index,wall_ms,joins,rows,plan_hash`.
    /// `run_index` reports how many timed runs the row's mean covers.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("query_id,shape,strategy,run_index,wall_ms,joins,rows,plan_hash\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3},{},{},{}",
                e.query_id,
                e.shape,
                e.strategy,
                e.timed_runs,
                e.wall_ms,
                e.joins,
                e.rows,
                e.plan_hash
            );
        }
        out
    }

    /// Mean wall time per (shape, strategy), shapes in C, F, L, S order.
    pub fn shape_summary(&self) -> Vec<(char, Strategy, f64)> {
        let mut out = Vec::new();
        for shape in ['C', 'F', 'L', 'S', '?'] {
            for strategy in [Strategy::Mixed, Strategy::VpOnly] {
                let times: Vec<f64> = self
                    .entries
                    .iter()
                    .filter(|e| e.shape == shape && e.strategy == strategy)
                    .map(|e| e.wall_ms)
                    .collect();
                if !times.is_empty() {
                    out.push((
                        shape,
                        strategy,
                        times.iter().sum::<f64>() / times.len() as f64,
                    ));
                }
            }
        }
        out
    }

    /// Mean wall time for one (shape, strategy) pair, if present.
    pub fn mean_for(&self, shape: char, strategy: Strategy) -> Option<f64> {
        self.shape_summary()
            .into_iter()
            .find(|&(s, st, _)| s == shape && st == strategy)
            .map(|(_, _, ms)| ms)
    }
}

/// Run every query under every strategy `repeat` times.
///
/// The warm-up run doubles as the correctness gate: all strategies must
/// return the same number of rows or the whole bench aborts without
/// reporting any timing.
pub fn run_bench(
    dataset: &Dataset,
    queries: &[BenchQuery],
    strategies: &[Strategy],
    repeat: usize,
) -> Result<BenchReport, BenchError> {
    let repeat = repeat.max(1);
    let mut report = BenchReport::default();

    for bq in queries {
        // warm-up + gate
        let mut first_runs = Vec::with_capacity(strategies.len());
        for &strategy in strategies {
            let start = Instant::now();
            let out = run_query(dataset, &bq.query, strategy);
            let elapsed = start.elapsed();
            first_runs.push((strategy, out, elapsed));
        }
        let cardinalities: Vec<usize> = first_runs.iter().map(|(_, o, _)| o.table.len()).collect();
        if cardinalities.windows(2).any(|w| w[0] != w[1]) {
            let details: Vec<String> = first_runs
                .iter()
                .map(|(s, o, _)| format!("{s}={}", o.table.len()))
                .collect();
            return Err(BenchError::CardinalityMismatch {
                query_id: bq.id.clone(),
                details: details.join(", "),
            });
        }

        for (strategy, out, warmup_elapsed) in first_runs {
            let plan_text = match &out.tree {
                Some(tree) => explain(tree),
                None => "EMPTY (predicate without data)\n".to_string(),
            };
            let mut times_ms: Vec<f64> = Vec::new();
            if repeat == 1 {
                times_ms.push(warmup_elapsed.as_secs_f64() * 1e3);
            } else {
                for _ in 1..repeat {
                    let start = Instant::now();
                    let rerun = run_query(dataset, &bq.query, strategy);
                    times_ms.push(start.elapsed().as_secs_f64() * 1e3);
                    debug_assert_eq!(rerun.table.len(), out.table.len());
                }
            }
            report.entries.push(BenchEntry {
                query_id: bq.id.clone(),
                shape: bq.shape,
                strategy,
                timed_runs: times_ms.len(),
                wall_ms: times_ms.iter().sum::<f64>() / times_ms.len() as f64,
                joins: out.joins,
                rows: out.table.len(),
                plan_hash: format!("{:016x}", fnv1a64(plan_text.as_bytes())),
            });
        }
    }
    Ok(report)
}

/// Shape tag from a query id or file stem: its first letter when it is one
/// of C, F, L, S (any case), else '?'.
pub fn shape_tag_of(id: &str) -> char {
    id.chars()
        .next()
        .map(|c| c.to_ascii_uppercase())
        .filter(|c| matches!(c, 'C' | 'F' | 'L' | 'S'))
        .unwrap_or('?')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparql::parse_query;
    use crate::workload::{generate_mixed_shapes, QueryShape};

    fn dataset_and_queries() -> (Dataset, Vec<BenchQuery>) {
        let w = generate_mixed_shapes(60, 8, 42, 5);
        let queries: Vec<BenchQuery> = w
            .queries
            .iter()
            .map(|q| BenchQuery {
                id: q.id.clone(),
                shape: q.shape.tag(),
                query: parse_query(&q.text).unwrap(),
            })
            .collect();
        let ds = Dataset::build(w.triples, w.dict, 8).unwrap();
        (ds, queries)
    }

    #[test]
    fn csv_has_one_row_per_query_strategy_pair() {
        let (ds, queries) = dataset_and_queries();
        assert_eq!(queries.len(), 20);
        let report = run_bench(&ds, &queries, &[Strategy::Mixed, Strategy::VpOnly], 3).unwrap();
        assert_eq!(report.entries.len(), 40);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 41); // header + 40 rows
        assert!(csv.starts_with("query_id,shape,strategy,run_index,wall_ms,joins,rows,plan_hash"));
        // warm-up discarded: two timed runs aggregated per row
        assert!(report.entries.iter().all(|e| e.timed_runs == 2));
    }

    #[test]
    fn star_queries_join_less_under_mixed() {
        let (ds, queries) = dataset_and_queries();
        let report = run_bench(&ds, &queries, &[Strategy::Mixed, Strategy::VpOnly], 1).unwrap();
        for q in queries
            .iter()
            .filter(|q| q.shape == 'S' && q.query.patterns.len() >= 2)
        {
            let mixed = report
                .entries
                .iter()
                .find(|e| e.query_id == q.id && e.strategy == Strategy::Mixed)
                .unwrap();
            let vp = report
                .entries
                .iter()
                .find(|e| e.query_id == q.id && e.strategy == Strategy::VpOnly)
                .unwrap();
            assert!(
                mixed.joins < vp.joins,
                "{}: {} vs {}",
                q.id,
                mixed.joins,
                vp.joins
            );
            assert_eq!(mixed.rows, vp.rows);
        }
    }

    #[test]
    fn shape_summary_lists_present_tags() {
        let (ds, queries) = dataset_and_queries();
        let report = run_bench(&ds, &queries, &[Strategy::Mixed], 1).unwrap();
        let tags: Vec<char> = report
            .shape_summary()
            .iter()
            .map(|&(shape, _, _)| shape)
            .collect();
        assert_eq!(tags, vec!['C', 'F', 'L', 'S']);
    }

    #[test]
    fn shape_tag_parsing() {
        assert_eq!(shape_tag_of("S3"), 'S');
        assert_eq!(shape_tag_of("f2"), 'F');
        assert_eq!(shape_tag_of("query7"), '?');
        assert_eq!(shape_tag_of(""), '?');
    }

    #[test]
    fn plan_hash_is_stable_per_strategy() {
        let (ds, queries) = dataset_and_queries();
        let a = run_bench(&ds, &queries, &[Strategy::Mixed], 1).unwrap();
        let b = run_bench(&ds, &queries, &[Strategy::Mixed], 1).unwrap();
        for (ea, eb) in a.entries.iter().zip(&b.entries) {
            assert_eq!(ea.plan_hash, eb.plan_hash);
        }
    }

    #[test]
    fn all_shapes_have_queries() {
        // every shape tag the generator claims to emit really shows up
        let w = generate_mixed_shapes(30, 6, 5, 2);
        for shape in QueryShape::ALL {
            assert!(w.queries.iter().any(|q| q.shape == shape));
        }
    }
}
