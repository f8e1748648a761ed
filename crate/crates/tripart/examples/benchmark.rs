//! Run the benchmark harness over a generated workload and print the CSV
//! report plus the per-shape summary, the same output `tripart bench`
//! produces.
//!
//! ```bash
//! cargo run --release --example benchmark
//! ```

use tripart::bench::{run_bench, BenchQuery};
use tripart::workload::generate_mixed_shapes;
use tripart::{parse_query, Dataset, Strategy};

fn main() {
    let workload = generate_mixed_shapes(20_000, 10, 99, 3);
    println!("dataset: {} triples", workload.triples.len());

    let queries: Vec<BenchQuery> = workload
        .queries
        .iter()
        .map(|q| BenchQuery {
            id: q.id.clone(),
            shape: q.shape.tag(),
            query: parse_query(&q.text).unwrap(),
        })
        .collect();
    let dataset = Dataset::build(workload.triples, workload.dict, 8).unwrap();

    // 3 runs per query and strategy; the first is warm-up
    let report = run_bench(&dataset, &queries, &[Strategy::Mixed, Strategy::VpOnly], 3)
        .expect("strategies must agree on cardinality");

    print!("{}", report.to_csv());
    println!("\nshape  strategy  mean_ms");
    for (shape, strategy, mean) in report.shape_summary() {
        println!("{shape:<6} {strategy:<9} {mean:>7.2}");
    }
}
