//! The two physical layouts: one two-column table per predicate (vertical
//! partitioning) and a single wide property table, one row per subject,
//! horizontally partitioned on a stable subject hash.
//!
//! Both layouts are built once from the loaded triple list and are immutable
//! afterwards; the executor reads them from any number of threads.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use thiserror::Error;

use crate::term::{Dictionary, Term, TermId, Triple};

pub mod persist;
pub mod rle;

pub use rle::{rle_decode, rle_encode, Cell, CellValue, RleColumn, Run};

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("partition count must be at least 1")]
    InvalidPartitionCount,
    #[error("corrupt column: {0}")]
    CorruptColumn(String),
    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersionMismatch { found: u8, expected: u8 },
    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// All `(subject, object)` pairs for one predicate, in canonical
/// `(subject, object)` order. Duplicated triples stay duplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VpTable {
    pub predicate: TermId,
    pub rows: Vec<(TermId, TermId)>,
}

impl VpTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows with the given subject; relies on canonical order.
    pub fn rows_for_subject(&self, subject: TermId) -> &[(TermId, TermId)] {
        let start = self.rows.partition_point(|&(s, _)| s < subject);
        let end = self.rows.partition_point(|&(s, _)| s <= subject);
        &self.rows[start..end]
    }
}

/// The set of VP tables, keyed by predicate.
pub type VpStore = BTreeMap<TermId, VpTable>;

/// One table per distinct predicate; total rows equal the input triple count.
pub fn build_vp(triples: &[Triple]) -> VpStore {
    let mut store: VpStore = BTreeMap::new();
    for t in triples {
        store
            .entry(t.predicate)
            .or_insert_with(|| VpTable {
                predicate: t.predicate,
                rows: Vec::new(),
            })
            .rows
            .push((t.subject, t.object));
    }
    for table in store.values_mut() {
        table.rows.sort_unstable();
    }
    store
}

/// One horizontal slice of the property table. A subject lands here iff
/// `hash(subject) % k == partition_index`; subjects are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtPartition {
    pub partition_index: usize,
    pub subjects: Vec<TermId>,
    /// One RLE column per predicate of the table schema, in schema order.
    pub columns: Vec<RleColumn>,
}

impl PtPartition {
    pub fn row_count(&self) -> usize {
        self.subjects.len()
    }

    /// Row index of a subject in this partition, if present.
    pub fn row_of(&self, subject: TermId) -> Option<usize> {
        self.subjects.binary_search(&subject).ok()
    }

    /// Dense cells of one column, validated against the partition row count.
    pub fn decode_column(&self, column_index: usize) -> Result<Vec<Cell>, StorageError> {
        rle_decode(&self.columns[column_index], self.subjects.len())
    }
}

/// The wide table: one row per distinct subject of the dataset, one column
/// per predicate, NULL where the `(subject, predicate)` pair has no triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyTable {
    /// Column schema: all predicates, ascending by id.
    pub predicates: Vec<TermId>,
    pub partitions: Vec<PtPartition>,
}

impl PropertyTable {
    pub fn partition_count(&self) -> usize {
        self.partitions.len()
    }

    pub fn subject_count(&self) -> usize {
        self.partitions.iter().map(|p| p.row_count()).sum()
    }

    pub fn column_index(&self, predicate: TermId) -> Option<usize> {
        self.predicates.binary_search(&predicate).ok()
    }

    /// Re-emit the stored triple bag: one `(s, p, o)` per cell value, walking
    /// partitions in index order. Used by reconstruction checks.
    pub fn flatten(&self) -> Result<Vec<Triple>, StorageError> {
        let mut out = Vec::new();
        for part in &self.partitions {
            for (col_idx, &predicate) in self.predicates.iter().enumerate() {
                let cells = part.decode_column(col_idx)?;
                for (row, cell) in cells.iter().enumerate() {
                    if let Some(value) = cell {
                        let subject = part.subjects[row];
                        for &object in value.as_slice() {
                            out.push(Triple::new(subject, predicate, object));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Seed-stable FNV-1a 64-bit hash.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Partition index for a subject term. Hashes the rendered lexical form, not
/// the dictionary id, so the routing is reproducible across runs and
/// platforms regardless of interning order.
pub fn partition_of(term: &Term, k: usize) -> usize {
    (fnv1a64(term.to_string().as_bytes()) % k as u64) as usize
}

/// Build the property table with `k` horizontal partitions.
pub fn build_pt(
    triples: &[Triple],
    dict: &Dictionary,
    k: usize,
) -> Result<PropertyTable, StorageError> {
    if k == 0 {
        return Err(StorageError::InvalidPartitionCount);
    }

    let mut predicates: Vec<TermId> = triples.iter().map(|t| t.predicate).collect();
    predicates.sort_unstable();
    predicates.dedup();

    // subject -> predicate -> objects in first-seen triple order
    let mut by_subject: HashMap<TermId, HashMap<TermId, Vec<TermId>>> = HashMap::new();
    for t in triples {
        by_subject
            .entry(t.subject)
            .or_default()
            .entry(t.predicate)
            .or_default()
            .push(t.object);
    }

    let mut partition_subjects: Vec<Vec<TermId>> = vec![Vec::new(); k];
    for &subject in by_subject.keys() {
        let idx = partition_of(dict.resolve(subject), k);
        partition_subjects[idx].push(subject);
    }

    let mut partitions = Vec::with_capacity(k);
    for (partition_index, mut subjects) in partition_subjects.into_iter().enumerate() {
        subjects.sort_unstable();
        let mut columns = Vec::with_capacity(predicates.len());
        for &predicate in &predicates {
            let cells: Vec<Cell> = subjects
                .iter()
                .map(|s| {
                    by_subject
                        .get_mut(s)
                        .unwrap()
                        .remove(&predicate)
                        .map(CellValue::from_values)
                })
                .collect();
            columns.push(rle::rle_encode_owned(cells));
        }
        partitions.push(PtPartition {
            partition_index,
            subjects,
            columns,
        });
    }

    Ok(PropertyTable {
        predicates,
        partitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn t(s: u32, p: u32, o: u32) -> Triple {
        Triple::new(TermId(s), TermId(p), TermId(o))
    }

    /// Dictionary whose term ids 0..n are plain entity IRIs.
    fn dict_of(n: u32) -> Dictionary {
        let mut dict = Dictionary::new();
        for i in 0..n {
            dict.intern(Term::iri(format!("http://ex/t{i}")));
        }
        dict
    }

    fn sorted(mut v: Vec<Triple>) -> Vec<Triple> {
        v.sort_unstable();
        v
    }

    #[test]
    fn vp_one_table_per_predicate() {
        // {(s1,p,o1),(s2,p,o2),(s1,q,o3)} -> vp[p] 2 rows, vp[q] 1 row
        let triples = vec![t(1, 10, 20), t(2, 10, 21), t(1, 11, 22)];
        let vp = build_vp(&triples);
        assert_eq!(vp.len(), 2);
        assert_eq!(vp[&TermId(10)].len(), 2);
        assert_eq!(vp[&TermId(11)].len(), 1);
        let total: usize = vp.values().map(|t| t.len()).sum();
        assert_eq!(total, triples.len());
    }

    #[test]
    fn vp_empty_input() {
        assert!(build_vp(&[]).is_empty());
    }

    #[test]
    fn vp_keeps_duplicates() {
        let mut rng = SplitMix64::new(3);
        let mut triples = Vec::new();
        for _ in 0..500 {
            let tr = t(
                rng.below(20) as u32,
                rng.below(4) as u32 + 100,
                rng.below(20) as u32,
            );
            triples.push(tr);
            if rng.chance(25) {
                triples.push(tr); // duplicate
            }
        }
        let vp = build_vp(&triples);
        let total: usize = vp.values().map(|t| t.len()).sum();
        assert_eq!(total, triples.len());
    }

    #[test]
    fn vp_rows_in_canonical_order() {
        let triples = vec![t(3, 10, 1), t(1, 10, 9), t(1, 10, 2), t(3, 10, 0)];
        let vp = build_vp(&triples);
        assert_eq!(
            vp[&TermId(10)].rows,
            vec![
                (TermId(1), TermId(2)),
                (TermId(1), TermId(9)),
                (TermId(3), TermId(0)),
                (TermId(3), TermId(1))
            ]
        );
    }

    #[test]
    fn vp_union_reconstructs_input_bag() {
        let mut rng = SplitMix64::new(5);
        let triples: Vec<Triple> = (0..2000)
            .map(|_| {
                t(
                    rng.below(50) as u32,
                    rng.below(8) as u32 + 100,
                    rng.below(60) as u32,
                )
            })
            .collect();
        let vp = build_vp(&triples);
        let mut union: Vec<Triple> = Vec::new();
        for table in vp.values() {
            for &(s, o) in &table.rows {
                union.push(Triple::new(s, table.predicate, o));
            }
        }
        assert_eq!(sorted(union), sorted(triples));
    }

    #[test]
    fn pt_multi_valued_cell() {
        // {(s,p,o1),(s,p,o2)} -> one row, cell = [o1, o2]
        let dict = dict_of(30);
        let pt = build_pt(&[t(0, 1, 2), t(0, 1, 3)], &dict, 4).unwrap();
        assert_eq!(pt.subject_count(), 1);
        let col = pt.column_index(TermId(1)).unwrap();
        let part = pt
            .partitions
            .iter()
            .find(|p| !p.subjects.is_empty())
            .unwrap();
        let cells = part.decode_column(col).unwrap();
        assert_eq!(cells[0], Some(CellValue::Multi(vec![TermId(2), TermId(3)])));
    }

    #[test]
    fn pt_nulls_where_subject_lacks_predicate() {
        // {(s1,p,o1),(s2,q,o2)} -> pt[s1][q] NULL, pt[s2][p] NULL
        let dict = dict_of(30);
        let pt = build_pt(&[t(0, 1, 2), t(3, 4, 5)], &dict, 1).unwrap();
        let part = &pt.partitions[0];
        assert_eq!(part.subjects, vec![TermId(0), TermId(3)]);
        let p_col = part
            .decode_column(pt.column_index(TermId(1)).unwrap())
            .unwrap();
        let q_col = part
            .decode_column(pt.column_index(TermId(4)).unwrap())
            .unwrap();
        assert_eq!(p_col[0], Some(CellValue::Single(TermId(2))));
        assert_eq!(p_col[1], None);
        assert_eq!(q_col[0], None);
        assert_eq!(q_col[1], Some(CellValue::Single(TermId(5))));
    }

    #[test]
    fn pt_single_partition_holds_everything() {
        let dict = dict_of(40);
        let triples: Vec<Triple> = (0..20).map(|i| t(i, 25, 30 + i % 5)).collect();
        let pt = build_pt(&triples, &dict, 1).unwrap();
        assert_eq!(pt.partition_count(), 1);
        assert_eq!(pt.partitions[0].row_count(), 20);
    }

    #[test]
    fn pt_zero_partitions_rejected() {
        let dict = dict_of(5);
        assert!(matches!(
            build_pt(&[t(0, 1, 2)], &dict, 0),
            Err(StorageError::InvalidPartitionCount)
        ));
    }

    #[test]
    fn pt_partition_residency() {
        let mut rng = SplitMix64::new(9);
        let dict = dict_of(100);
        let triples: Vec<Triple> = (0..500)
            .map(|_| t(rng.below(60) as u32, 90, rng.below(40) as u32))
            .collect();
        for k in [1usize, 2, 8, 17] {
            let pt = build_pt(&triples, &dict, k).unwrap();
            assert_eq!(pt.partition_count(), k);
            for part in &pt.partitions {
                for &s in &part.subjects {
                    assert_eq!(partition_of(dict.resolve(s), k), part.partition_index);
                }
            }
        }
    }

    #[test]
    fn pt_each_subject_in_exactly_one_partition() {
        let mut rng = SplitMix64::new(13);
        let dict = dict_of(100);
        let triples: Vec<Triple> = (0..800)
            .map(|_| {
                t(
                    rng.below(70) as u32,
                    80 + rng.below(5) as u32,
                    rng.below(90) as u32,
                )
            })
            .collect();
        let pt = build_pt(&triples, &dict, 8).unwrap();
        let mut seen: Vec<TermId> = Vec::new();
        for part in &pt.partitions {
            seen.extend_from_slice(&part.subjects);
        }
        let mut expected: Vec<TermId> = triples.iter().map(|t| t.subject).collect();
        expected.sort_unstable();
        expected.dedup();
        seen.sort_unstable();
        assert_eq!(seen, expected);
    }

    #[test]
    fn pt_flatten_reconstructs_input_bag() {
        let mut rng = SplitMix64::new(17);
        let dict = dict_of(200);
        let mut triples = Vec::new();
        for _ in 0..1500 {
            let tr = t(
                rng.below(80) as u32,
                100 + rng.below(6) as u32,
                rng.below(120) as u32,
            );
            triples.push(tr);
            if rng.chance(10) {
                triples.push(tr);
            }
        }
        let pt = build_pt(&triples, &dict, 8).unwrap();
        assert_eq!(sorted(pt.flatten().unwrap()), sorted(triples));
    }

    #[test]
    fn pt_empty_input() {
        let dict = dict_of(1);
        let pt = build_pt(&[], &dict, 4).unwrap();
        assert!(pt.predicates.is_empty());
        assert_eq!(pt.subject_count(), 0);
        assert_eq!(pt.partition_count(), 4);
        assert!(pt.flatten().unwrap().is_empty());
    }
}
