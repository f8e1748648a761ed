//! Show how the same query plans under the mixed strategy (same-subject
//! groups become property-table nodes) versus vertical partitioning alone.
//!
//! ```bash
//! cargo run --example explain_plans
//! ```

use tripart::{explain, parse_ntriples_str, parse_query, plan_query, Dataset, Strategy};

fn main() {
    // a small social graph with a popular "type" predicate and rarer ones
    let mut data = String::new();
    for i in 0..200 {
        data.push_str(&format!(
            "<http://ex/u{i}> <http://ex/type> <http://ex/Person> .\n"
        ));
        data.push_str(&format!(
            "<http://ex/u{i}> <http://ex/follows> <http://ex/u{}> .\n",
            (i * 7 + 3) % 200
        ));
        if i % 4 == 0 {
            data.push_str(&format!(
                "<http://ex/u{i}> <http://ex/name> \"user {i}\" .\n"
            ));
        }
        if i % 20 == 0 {
            data.push_str(&format!(
                "<http://ex/u{i}> <http://ex/verified> \"true\" .\n"
            ));
        }
    }
    let (triples, dict) = parse_ntriples_str(&data).unwrap();
    let dataset = Dataset::build(triples, dict, 4).unwrap();

    println!("per-predicate statistics (triples / distinct subjects):");
    for (p, s) in dataset.stats.iter() {
        println!(
            "  {:<28} {:>5} / {:>4}",
            dataset.dict.resolve(p).to_string(),
            s.triple_count,
            s.distinct_subjects
        );
    }

    let query = parse_query(
        "SELECT ?u ?f WHERE {
           ?u <http://ex/type> <http://ex/Person> .
           ?u <http://ex/verified> \"true\" .
           ?u <http://ex/follows> ?f .
           ?f <http://ex/name> ?n .
         }",
    )
    .unwrap();

    for strategy in [Strategy::Mixed, Strategy::VpOnly] {
        let tree = plan_query(&query, &dataset.dict, &dataset.stats, strategy).unwrap();
        println!(
            "\n=== {strategy} strategy: {} node(s), {} join(s) ===",
            tree.node_count(),
            tree.join_count()
        );
        // root first; the deepest line is evaluated first
        print!("{}", explain(&tree));
    }
}
