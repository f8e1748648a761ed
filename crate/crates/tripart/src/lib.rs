//! tripart: a single-node RDF store that keeps every graph twice — as one
//! two-column table per predicate (vertical partitioning) and as a single
//! wide, run-length-encoded property table partitioned on subject — and
//! answers basic-graph-pattern SPARQL queries by splitting each query across
//! whichever layout suits each part, guided by per-predicate statistics.
//!
//! Start with [`Dataset`] to load or build a store, [`sparql::parse_query`]
//! for queries, and [`executor::run_query`] to evaluate them. The
//! `examples/` directory walks through every major capability.

pub mod bench;
pub mod dataset;
pub mod executor;
pub mod ntriples;
pub mod oracle;
pub mod planner;
pub mod sparql;
pub mod stats;
pub mod storage;
pub mod term;
pub mod workload;

pub(crate) mod rng;

pub use dataset::Dataset;
pub use executor::{run_query, BindingTable, QueryOutput};
pub use ntriples::{parse_ntriples, parse_ntriples_str, write_ntriples, ParseError};
pub use planner::{explain, plan_query, JoinTree, PlanError, Strategy};
pub use sparql::{parse_query, BgpQuery, QueryParseError};
pub use stats::{compute_stats, Stats};
pub use storage::StorageError;
pub use term::{Dictionary, Term, TermId, Triple};
