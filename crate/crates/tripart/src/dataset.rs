//! A fully built store: dictionary, VP tables, property table, statistics.
//!
//! Immutable once built or loaded; safe to share across threads.

use std::path::Path;

use crate::stats::{compute_stats, Stats};
use crate::storage::{self, persist, PropertyTable, StorageError, VpStore};
use crate::term::{Dictionary, Triple};

/// Partition count used when the caller does not pick one.
pub const DEFAULT_PARTITIONS: usize = 8;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub dict: Dictionary,
    pub vp: VpStore,
    pub pt: PropertyTable,
    pub stats: Stats,
}

impl Dataset {
    /// Build both layouts and the statistics from an interned triple list.
    pub fn build(
        triples: Vec<Triple>,
        dict: Dictionary,
        k: usize,
    ) -> Result<Dataset, StorageError> {
        let vp = storage::build_vp(&triples);
        let pt = storage::build_pt(&triples, &dict, k)?;
        let stats = compute_stats(&triples);
        Ok(Dataset {
            dict,
            vp,
            pt,
            stats,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<(), StorageError> {
        persist::save_dataset(dir, &self.dict, &self.vp, &self.pt, &self.stats)
    }

    pub fn load(dir: &Path) -> Result<Dataset, StorageError> {
        let (dict, vp, pt, stats) = persist::load_dataset(dir)?;
        Ok(Dataset {
            dict,
            vp,
            pt,
            stats,
        })
    }

    pub fn triple_count(&self) -> usize {
        self.vp.values().map(|t| t.len()).sum()
    }

    /// Reconstruct the stored triple bag from the VP tables, in canonical
    /// (predicate, subject, object) order.
    pub fn triples(&self) -> Vec<Triple> {
        let mut out = Vec::with_capacity(self.triple_count());
        for table in self.vp.values() {
            for &(s, o) in &table.rows {
                out.push(Triple::new(s, table.predicate, o));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::parse_ntriples_str;

    #[test]
    fn build_ties_layouts_together() {
        let (triples, dict) = parse_ntriples_str(
            "<http://ex/a> <http://ex/p> <http://ex/b> .\n\
             <http://ex/a> <http://ex/q> \"v\" .\n\
             <http://ex/b> <http://ex/p> <http://ex/c> .\n",
        )
        .unwrap();
        let n = triples.len();
        let ds = Dataset::build(triples, dict, 4).unwrap();
        assert_eq!(ds.triple_count(), n);
        assert_eq!(ds.stats.total_triples(), n as u64);
        assert_eq!(ds.pt.partition_count(), 4);
        // reconstruction from VP matches reconstruction from PT
        let mut from_vp = ds.triples();
        let mut from_pt = ds.pt.flatten().unwrap();
        from_vp.sort_unstable();
        from_pt.sort_unstable();
        assert_eq!(from_vp, from_pt);
    }
}
