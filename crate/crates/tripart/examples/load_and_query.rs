//! Parse N-Triples, build the two storage layouts, and answer a query.
//!
//! ```bash
//! cargo run --example load_and_query
//! ```

use tripart::executor::write_tsv;
use tripart::{parse_ntriples_str, parse_query, run_query, Dataset, Strategy};

const DATA: &str = r#"<http://ex/alice> <http://ex/knows> <http://ex/bob> .
<http://ex/alice> <http://ex/name> "Alice" .
<http://ex/alice> <http://ex/city> "Berlin" .
<http://ex/bob>   <http://ex/knows> <http://ex/carol> .
<http://ex/bob>   <http://ex/name> "Bob" .
<http://ex/bob>   <http://ex/city> "Berlin" .
<http://ex/carol> <http://ex/name> "Carol" .
<http://ex/carol> <http://ex/city> "Paris" .
"#;

const QUERY: &str = r#"
SELECT ?person ?friend WHERE {
  ?person <http://ex/city> "Berlin" .
  ?person <http://ex/knows> ?friend .
  ?friend <http://ex/name> ?n .
}
"#;

fn main() {
    let (triples, dict) = parse_ntriples_str(DATA).expect("valid N-Triples");
    println!(
        "loaded {} triples, {} distinct terms",
        triples.len(),
        dict.len()
    );

    let dataset = Dataset::build(triples, dict, 4).expect("build dataset");
    println!(
        "built {} VP tables and a property table with {} rows over {} partitions\n",
        dataset.vp.len(),
        dataset.pt.subject_count(),
        dataset.pt.partition_count()
    );

    let query = parse_query(QUERY).expect("valid query");
    let result = run_query(&dataset, &query, Strategy::Mixed);
    println!("executed with {} join(s); results:", result.joins);
    let mut out = Vec::new();
    write_tsv(&result.table, &dataset.dict, None, &mut out).unwrap();
    print!("{}", String::from_utf8(out).unwrap());
}
