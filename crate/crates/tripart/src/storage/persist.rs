//! Versioned on-disk dataset directory.
//!
//! ```text
//! manifest        magic PRSTL + version byte, then k, predicate schema
//!                 (count + ids) and dictionary size, all u64 little-endian
//! dict.tsv        <id> TAB <kind-tag> TAB <lexical> per term; kind tags are
//!                 I (IRI), L (literal, N-Triples form), B (blank node);
//!                 lexical is backslash-escaped for tab, newline, backslash
//! vp/<pid>.bin    row count, then (subject, object) u64 pairs in canonical
//!                 order
//! pt/part-<i>.bin subject count + ids, then one RLE column per schema
//!                 predicate (see `rle`)
//! stats.tsv       <pid> TAB <triple count> TAB <distinct subjects>
//! ```

use std::fs;
use std::path::Path;

use crate::ntriples::parse_term_str;
use crate::stats::{PredicateStats, Stats};
use crate::storage::{rle, PropertyTable, PtPartition, StorageError, VpStore, VpTable};
use crate::term::{Dictionary, Term, TermId};

const MAGIC: &[u8; 5] = b"PRSTL";
const VERSION: u8 = b'1';

pub fn save_dataset(
    dir: &Path,
    dict: &Dictionary,
    vp: &VpStore,
    pt: &PropertyTable,
    stats: &Stats,
) -> Result<(), StorageError> {
    fs::create_dir_all(dir.join("vp"))?;
    fs::create_dir_all(dir.join("pt"))?;

    let mut manifest = Vec::new();
    manifest.extend_from_slice(MAGIC);
    manifest.push(VERSION);
    push_u64(&mut manifest, pt.partition_count() as u64);
    push_u64(&mut manifest, pt.predicates.len() as u64);
    for &p in &pt.predicates {
        push_u64(&mut manifest, p.0 as u64);
    }
    push_u64(&mut manifest, dict.len() as u64);
    fs::write(dir.join("manifest"), manifest)?;

    let mut dict_tsv = String::new();
    for (id, term) in dict.iter() {
        let (tag, lexical) = match term {
            Term::Iri(iri) => ('I', iri.clone()),
            Term::Literal { .. } => ('L', term.to_string()),
            Term::BlankNode(label) => ('B', label.clone()),
        };
        dict_tsv.push_str(&format!("{id}\t{tag}\t{}\n", tsv_escape(&lexical)));
    }
    fs::write(dir.join("dict.tsv"), dict_tsv)?;

    for table in vp.values() {
        let mut bytes = Vec::with_capacity(8 + table.rows.len() * 16);
        push_u64(&mut bytes, table.rows.len() as u64);
        for &(s, o) in &table.rows {
            push_u64(&mut bytes, s.0 as u64);
            push_u64(&mut bytes, o.0 as u64);
        }
        fs::write(
            dir.join("vp").join(format!("{}.bin", table.predicate)),
            bytes,
        )?;
    }

    for part in &pt.partitions {
        let mut bytes = Vec::new();
        push_u64(&mut bytes, part.subjects.len() as u64);
        for &s in &part.subjects {
            push_u64(&mut bytes, s.0 as u64);
        }
        for col in &part.columns {
            rle::write_column(&mut bytes, col);
        }
        fs::write(
            dir.join("pt")
                .join(format!("part-{}.bin", part.partition_index)),
            bytes,
        )?;
    }

    let mut stats_tsv = String::new();
    for (p, s) in stats.iter() {
        stats_tsv.push_str(&format!(
            "{p}\t{}\t{}\n",
            s.triple_count, s.distinct_subjects
        ));
    }
    fs::write(dir.join("stats.tsv"), stats_tsv)?;

    Ok(())
}

pub fn load_dataset(
    dir: &Path,
) -> Result<(Dictionary, VpStore, PropertyTable, Stats), StorageError> {
    let manifest_path = dir.join("manifest");
    let manifest = read_file(&manifest_path)?;
    if manifest.len() < 6 || &manifest[..5] != MAGIC {
        return Err(corrupt(&manifest_path, "missing or bad magic bytes"));
    }
    if manifest[5] != VERSION {
        return Err(StorageError::FormatVersionMismatch {
            found: manifest[5],
            expected: VERSION,
        });
    }
    let mut cursor = Reader::new(&manifest[6..], &manifest_path);
    let k = cursor.u64()? as usize;
    if k == 0 {
        return Err(corrupt(&manifest_path, "partition count is zero"));
    }
    let pred_count = cursor.u64()? as usize;
    let mut predicates = Vec::with_capacity(pred_count);
    for _ in 0..pred_count {
        predicates.push(cursor.term_id()?);
    }
    let dict_size = cursor.u64()? as usize;
    cursor.expect_end()?;

    let dict = load_dict(&dir.join("dict.tsv"), dict_size)?;

    let mut vp = VpStore::new();
    for &predicate in &predicates {
        let path = dir.join("vp").join(format!("{predicate}.bin"));
        let bytes = read_file(&path)?;
        let mut cursor = Reader::new(&bytes, &path);
        let row_count = cursor.u64()? as usize;
        let mut rows = Vec::with_capacity(row_count);
        for _ in 0..row_count {
            let s = cursor.term_id()?;
            let o = cursor.term_id()?;
            check_id(s, dict_size, &path)?;
            check_id(o, dict_size, &path)?;
            rows.push((s, o));
        }
        cursor.expect_end()?;
        if !rows.is_sorted() {
            return Err(corrupt(
                &path,
                "rows not in canonical (subject, object) order",
            ));
        }
        vp.insert(predicate, VpTable { predicate, rows });
    }

    let mut partitions = Vec::with_capacity(k);
    for partition_index in 0..k {
        let path = dir.join("pt").join(format!("part-{partition_index}.bin"));
        let bytes = read_file(&path)?;
        let mut cursor = Reader::new(&bytes, &path);
        let subject_count = cursor.u64()? as usize;
        let mut subjects = Vec::with_capacity(subject_count);
        for _ in 0..subject_count {
            let s = cursor.term_id()?;
            check_id(s, dict_size, &path)?;
            subjects.push(s);
        }
        if !subjects.is_sorted() {
            return Err(corrupt(&path, "subjects not sorted"));
        }
        let mut columns = Vec::with_capacity(predicates.len());
        for _ in 0..predicates.len() {
            let col =
                rle::read_column(cursor.rest()).map_err(|e| corrupt(&path, &e.to_string()))?;
            if col.row_count() != subject_count {
                return Err(corrupt(
                    &path,
                    &format!(
                        "column covers {} rows, partition has {subject_count} subjects",
                        col.row_count()
                    ),
                ));
            }
            if col.present_count() != col.values().len() {
                return Err(corrupt(&path, "payload count disagrees with runs"));
            }
            for value in col.values() {
                for &id in value.as_slice() {
                    check_id(id, dict_size, &path)?;
                }
            }
            columns.push(col);
        }
        cursor.expect_end()?;
        partitions.push(PtPartition {
            partition_index,
            subjects,
            columns,
        });
    }
    let pt = PropertyTable {
        predicates,
        partitions,
    };

    let stats = load_stats(&dir.join("stats.tsv"), dict_size)?;

    Ok((dict, vp, pt, stats))
}

fn load_dict(path: &Path, expected: usize) -> Result<Dictionary, StorageError> {
    let text = read_text(path)?;
    let mut dict = Dictionary::new();
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.splitn(3, '\t');
        let (id, tag, lexical) = match (fields.next(), fields.next(), fields.next()) {
            (Some(id), Some(tag), Some(lex)) => (id, tag, lex),
            _ => return Err(corrupt(path, &format!("line {}: expected 3 fields", i + 1))),
        };
        let id: u32 = id
            .parse()
            .map_err(|_| corrupt(path, &format!("line {}: bad id", i + 1)))?;
        if id as usize != i {
            return Err(corrupt(path, &format!("line {}: ids not dense", i + 1)));
        }
        let lexical = tsv_unescape(lexical)
            .ok_or_else(|| corrupt(path, &format!("line {}: bad escape", i + 1)))?;
        let term = match tag {
            "I" => {
                if lexical.is_empty() || lexical.chars().any(char::is_whitespace) {
                    return Err(corrupt(path, &format!("line {}: invalid IRI", i + 1)));
                }
                Term::Iri(lexical)
            }
            "B" => Term::BlankNode(lexical),
            "L" => {
                let term = parse_term_str(&lexical)
                    .map_err(|e| corrupt(path, &format!("line {}: {e}", i + 1)))?;
                if !term.is_literal() {
                    return Err(corrupt(
                        path,
                        &format!("line {}: tag L but not a literal", i + 1),
                    ));
                }
                term
            }
            other => {
                return Err(corrupt(
                    path,
                    &format!("line {}: unknown kind tag '{other}'", i + 1),
                ))
            }
        };
        let assigned = dict.intern(term);
        if assigned.0 != id {
            return Err(corrupt(path, &format!("line {}: duplicate term", i + 1)));
        }
    }
    if dict.len() != expected {
        return Err(corrupt(
            path,
            &format!("{} terms, manifest declares {expected}", dict.len()),
        ));
    }
    Ok(dict)
}

fn load_stats(path: &Path, dict_size: usize) -> Result<Stats, StorageError> {
    let text = read_text(path)?;
    let mut stats = Stats::default();
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split('\t');
        let parse = |f: Option<&str>| -> Result<u64, StorageError> {
            f.and_then(|v| v.parse().ok())
                .ok_or_else(|| corrupt(path, &format!("line {}: bad field", i + 1)))
        };
        let pid = parse(fields.next())?;
        let triple_count = parse(fields.next())?;
        let distinct_subjects = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(corrupt(path, &format!("line {}: too many fields", i + 1)));
        }
        if pid as usize >= dict_size {
            return Err(corrupt(
                path,
                &format!("line {}: predicate id out of range", i + 1),
            ));
        }
        if distinct_subjects == 0 || distinct_subjects > triple_count {
            return Err(corrupt(
                path,
                &format!("line {}: implausible counts", i + 1),
            ));
        }
        stats.insert(
            TermId(pid as u32),
            PredicateStats {
                triple_count,
                distinct_subjects,
            },
        );
    }
    Ok(stats)
}

fn tsv_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

fn tsv_unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            't' => out.push('\t'),
            'n' => out.push('\n'),
            _ => return None,
        }
    }
    Some(out)
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn corrupt(path: &Path, reason: &str) -> StorageError {
    StorageError::CorruptFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, StorageError> {
    match fs::read(path) {
        Ok(bytes) => Ok(bytes),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(corrupt(path, "file missing")),
        Err(e) => Err(e.into()),
    }
}

fn read_text(path: &Path) -> Result<String, StorageError> {
    let bytes = read_file(path)?;
    String::from_utf8(bytes).map_err(|_| corrupt(path, "not valid UTF-8"))
}

fn check_id(id: TermId, dict_size: usize, path: &Path) -> Result<(), StorageError> {
    if id.index() >= dict_size {
        Err(corrupt(
            path,
            &format!("term id {id} out of dictionary range"),
        ))
    } else {
        Ok(())
    }
}

/// Byte cursor whose errors carry the file being read.
struct Reader<'a> {
    buf: &'a [u8],
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], path: &'a Path) -> Reader<'a> {
        Reader { buf, path }
    }

    fn u64(&mut self) -> Result<u64, StorageError> {
        if self.buf.len() < 8 {
            return Err(corrupt(self.path, "truncated integer"));
        }
        let (head, rest) = self.buf.split_at(8);
        self.buf = rest;
        Ok(u64::from_le_bytes(head.try_into().unwrap()))
    }

    fn term_id(&mut self) -> Result<TermId, StorageError> {
        let raw = self.u64()?;
        u32::try_from(raw)
            .map(TermId)
            .map_err(|_| corrupt(self.path, &format!("term id {raw} out of range")))
    }

    fn rest(&mut self) -> &mut &'a [u8] {
        &mut self.buf
    }

    fn expect_end(&self) -> Result<(), StorageError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(corrupt(self.path, "trailing bytes"))
        }
    }
}
