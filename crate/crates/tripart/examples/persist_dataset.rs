//! Save a dataset directory, inspect its layout, reload it, and confirm the
//! reloaded store answers queries identically.
//!
//! ```bash
//! cargo run --example persist_dataset
//! ```

use std::fs;

use tripart::workload::generate_mixed_shapes;
use tripart::{parse_query, run_query, Dataset, Strategy};

fn main() {
    let workload = generate_mixed_shapes(300, 6, 11, 2);
    let dataset = Dataset::build(workload.triples, workload.dict, 4).unwrap();

    let dir = std::env::temp_dir().join("tripart-persist-example");
    let _ = fs::remove_dir_all(&dir);
    dataset.save(&dir).expect("save dataset");

    println!("dataset directory {}:", dir.display());
    let mut paths: Vec<_> = walk(&dir);
    paths.sort();
    for (path, size) in paths {
        println!("  {:<18} {:>8} bytes", path, size);
    }

    let reloaded = Dataset::load(&dir).expect("load dataset");
    println!(
        "\nreloaded: {} triples, {} terms, {} partitions",
        reloaded.triple_count(),
        reloaded.dict.len(),
        reloaded.pt.partition_count()
    );

    let mut checked = 0;
    for q in &workload.queries {
        let query = parse_query(&q.text).unwrap();
        let before = run_query(&dataset, &query, Strategy::Mixed);
        let after = run_query(&reloaded, &query, Strategy::Mixed);
        assert_eq!(before.table.bag(), after.table.bag(), "{} changed", q.id);
        checked += 1;
    }
    println!("{checked} queries answer identically before and after reload");
}

fn walk(dir: &std::path::Path) -> Vec<(String, u64)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let meta = entry.metadata().unwrap();
        let name = entry
            .path()
            .strip_prefix(dir)
            .unwrap()
            .display()
            .to_string();
        if meta.is_dir() {
            for (sub, size) in walk(&entry.path()) {
                out.push((format!("{name}/{sub}"), size));
            }
        } else {
            out.push((name, meta.len()));
        }
    }
    out
}
