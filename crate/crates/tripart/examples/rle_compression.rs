//! Inspect how run-length encoding compresses the property table's
//! mostly-NULL columns compared with a flag-per-row layout.
//!
//! ```bash
//! cargo run --example rle_compression
//! ```

use tripart::storage::{rle, CellValue};
use tripart::workload::generate_mixed_shapes;
use tripart::Dataset;

fn main() {
    let workload = generate_mixed_shapes(2000, 12, 3, 1);
    let dataset = Dataset::build(workload.triples, workload.dict, 1).unwrap();
    let part = &dataset.pt.partitions[0];
    let rows = part.row_count();

    println!(
        "property table: {} rows x {} predicate columns\n",
        rows,
        dataset.pt.predicates.len()
    );
    println!("column                        nulls   runs  rle bytes  dense bytes  ratio");

    let (mut total_rle, mut total_dense) = (0usize, 0usize);
    for (idx, &predicate) in dataset.pt.predicates.iter().enumerate() {
        let col = &part.columns[idx];
        let nulls = rows - col.present_count();

        let mut rle_bytes = Vec::new();
        rle::write_column(&mut rle_bytes, col);

        // the naive alternative: one presence flag per row + the payloads
        let payload: usize = col
            .values()
            .iter()
            .map(|v| match v {
                CellValue::Single(_) => 8,
                CellValue::Multi(ids) => 8 + 8 * ids.len(),
            })
            .sum();
        let dense_bytes = rows + payload;

        println!(
            "{:<28} {:>5.1}%  {:>5}  {:>9}  {:>11}  {:>5.2}",
            dataset.dict.resolve(predicate).to_string(),
            100.0 * nulls as f64 / rows as f64,
            col.runs().len(),
            rle_bytes.len(),
            dense_bytes,
            rle_bytes.len() as f64 / dense_bytes as f64
        );
        total_rle += rle_bytes.len();
        total_dense += dense_bytes;
    }
    println!(
        "\ntotal: {} bytes RLE vs {} bytes dense ({:.0}% saved)",
        total_rle,
        total_dense,
        100.0 * (1.0 - total_rle as f64 / total_dense as f64)
    );
}
