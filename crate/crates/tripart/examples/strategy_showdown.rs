//! Generate a shaped workload and verify the mixed strategy against both
//! the VP-only strategy and the brute-force oracle: identical answers,
//! fewer joins.
//!
//! ```bash
//! cargo run --example strategy_showdown
//! ```

use tripart::oracle::nested_loop_eval;
use tripart::workload::generate_mixed_shapes;
use tripart::{parse_query, run_query, Dataset, Strategy};

fn main() {
    let workload = generate_mixed_shapes(400, 8, 42, 3);
    println!(
        "generated {} triples and {} queries (shapes C/F/L/S)\n",
        workload.triples.len(),
        workload.queries.len()
    );
    let raw_triples = workload.triples.clone();
    let dataset = Dataset::build(workload.triples, workload.dict, 8).unwrap();

    println!("query  shape  rows  joins(mixed)  joins(vp)  vs oracle");
    for q in &workload.queries {
        let query = parse_query(&q.text).unwrap();
        let mixed = run_query(&dataset, &query, Strategy::Mixed);
        let vp = run_query(&dataset, &query, Strategy::VpOnly);
        let oracle = nested_loop_eval(&query, &raw_triples, &dataset.dict);

        let agree = mixed.table.bag() == oracle.bag() && vp.table.bag() == oracle.bag();
        println!(
            "{:<6} {:<6} {:>4}  {:>12}  {:>9}  {}",
            q.id,
            q.shape,
            oracle.len(),
            mixed.joins,
            vp.joins,
            if agree { "ok" } else { "MISMATCH" }
        );
        assert!(agree, "strategies must agree with the oracle");
        assert!(mixed.joins <= vp.joins, "mixed must never join more");
    }
    println!("\nall strategies agree with the brute-force oracle");
}
