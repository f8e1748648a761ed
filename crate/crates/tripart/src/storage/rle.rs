//! Run-length encoded columns for the property table.
//!
//! A column is a sequence of cells, one per subject row; a cell is either
//! NULL or a non-empty list of object ids. Mostly-NULL columns are the norm,
//! so NULL stretches are collapsed into runs instead of being stored per row.

use crate::storage::StorageError;
use crate::term::TermId;

/// Payload of a non-NULL cell. The single-value case is kept inline because
/// it dominates real data; multi-valued cells hold the objects in first-seen
/// triple order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellValue {
    Single(TermId),
    Multi(Vec<TermId>),
}

impl CellValue {
    pub fn from_values(mut values: Vec<TermId>) -> CellValue {
        if values.len() == 1 {
            CellValue::Single(values.pop().unwrap())
        } else {
            CellValue::Multi(values)
        }
    }

    pub fn as_slice(&self) -> &[TermId] {
        match self {
            CellValue::Single(v) => std::slice::from_ref(v),
            CellValue::Multi(vs) => vs,
        }
    }

    pub fn len(&self) -> usize {
        self.as_slice().len()
    }

    pub fn is_empty(&self) -> bool {
        false // a cell payload is never empty; absence is NULL
    }
}

/// One cell of a property table column.
pub type Cell = Option<CellValue>;

/// A maximal run of consecutive cells that are all present or all NULL.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct Run {
    pub length: u64,
    pub present: bool,
}

/// A run-length encoded column: runs alternate between present and NULL,
/// and `values` holds one payload per present cell, in row order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RleColumn {
    runs: Vec<Run>,
    values: Vec<CellValue>,
}

impl RleColumn {
    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn values(&self) -> &[CellValue] {
        &self.values
    }

    /// Total row count covered by the runs.
    pub fn row_count(&self) -> usize {
        self.runs.iter().map(|r| r.length as usize).sum()
    }

    /// Number of non-NULL cells.
    pub fn present_count(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.present)
            .map(|r| r.length as usize)
            .sum()
    }
}

/// Encode a dense cell sequence. Runs come out maximal: adjacent runs always
/// have opposite `present` flags.
pub fn rle_encode(cells: &[Cell]) -> RleColumn {
    let mut runs: Vec<Run> = Vec::new();
    let mut values = Vec::new();
    for cell in cells {
        let present = cell.is_some();
        if let Some(v) = cell {
            values.push(v.clone());
        }
        match runs.last_mut() {
            Some(run) if run.present == present => run.length += 1,
            _ => runs.push(Run { length: 1, present }),
        }
    }
    RleColumn { runs, values }
}

/// Encode by consuming the cells, avoiding payload clones during builds.
pub fn rle_encode_owned(cells: Vec<Cell>) -> RleColumn {
    let mut runs: Vec<Run> = Vec::new();
    let mut values = Vec::new();
    for cell in cells {
        let present = cell.is_some();
        if let Some(v) = cell {
            values.push(v);
        }
        match runs.last_mut() {
            Some(run) if run.present == present => run.length += 1,
            _ => runs.push(Run { length: 1, present }),
        }
    }
    RleColumn { runs, values }
}

/// Decode back to a dense cell sequence, validating against the row count
/// declared by the enclosing partition.
pub fn rle_decode(col: &RleColumn, expected_rows: usize) -> Result<Vec<Cell>, StorageError> {
    let total = col.row_count();
    if total != expected_rows {
        return Err(StorageError::CorruptColumn(format!(
            "run lengths cover {total} rows, partition declares {expected_rows}"
        )));
    }
    if col.present_count() != col.values.len() {
        return Err(StorageError::CorruptColumn(format!(
            "{} present cells but {} payloads",
            col.present_count(),
            col.values.len()
        )));
    }
    let mut cells = Vec::with_capacity(expected_rows);
    let mut next_value = col.values.iter();
    for run in &col.runs {
        if run.length == 0 {
            return Err(StorageError::CorruptColumn("zero-length run".into()));
        }
        for _ in 0..run.length {
            if run.present {
                cells.push(Some(next_value.next().unwrap().clone()));
            } else {
                cells.push(None);
            }
        }
    }
    Ok(cells)
}

// On-disk layout of one column:
//   run count        u64 LE
//   per run          LEB128 varint of (length << 1 | present)
//   per present cell u64 LE header; bit 63 clear -> the header is the single
//                    value, bit 63 set -> low bits are the list length,
//                    followed by that many u64 LE values.
const LIST_FLAG: u64 = 1 << 63;

pub fn write_column(out: &mut Vec<u8>, col: &RleColumn) {
    out.extend_from_slice(&(col.runs.len() as u64).to_le_bytes());
    for run in &col.runs {
        write_varint(out, run.length << 1 | run.present as u64);
    }
    for value in &col.values {
        match value {
            CellValue::Single(id) => out.extend_from_slice(&(id.0 as u64).to_le_bytes()),
            CellValue::Multi(ids) => {
                out.extend_from_slice(&(LIST_FLAG | ids.len() as u64).to_le_bytes());
                for id in ids {
                    out.extend_from_slice(&(id.0 as u64).to_le_bytes());
                }
            }
        }
    }
}

pub fn read_column(input: &mut &[u8]) -> Result<RleColumn, StorageError> {
    let run_count = read_u64(input)? as usize;
    let mut runs = Vec::with_capacity(run_count.min(1 << 20));
    let mut present_cells = 0usize;
    for _ in 0..run_count {
        let raw = read_varint(input)?;
        let run = Run {
            length: raw >> 1,
            present: raw & 1 == 1,
        };
        if run.present {
            present_cells += run.length as usize;
        }
        runs.push(run);
    }
    let mut values = Vec::with_capacity(present_cells.min(1 << 20));
    for _ in 0..present_cells {
        let header = read_u64(input)?;
        if header & LIST_FLAG == 0 {
            values.push(CellValue::Single(id_from_u64(header)?));
        } else {
            let len = (header & !LIST_FLAG) as usize;
            if len == 0 {
                return Err(StorageError::CorruptColumn("empty list cell".into()));
            }
            let mut ids = Vec::with_capacity(len.min(1 << 20));
            for _ in 0..len {
                ids.push(id_from_u64(read_u64(input)?)?);
            }
            values.push(CellValue::Multi(ids));
        }
    }
    Ok(RleColumn { runs, values })
}

fn id_from_u64(raw: u64) -> Result<TermId, StorageError> {
    u32::try_from(raw)
        .map(TermId)
        .map_err(|_| StorageError::CorruptColumn(format!("term id {raw} out of range")))
}

fn write_varint(out: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn read_varint(input: &mut &[u8]) -> Result<u64, StorageError> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let (&byte, rest) = input
            .split_first()
            .ok_or_else(|| StorageError::CorruptColumn("truncated varint".into()))?;
        *input = rest;
        if shift >= 64 {
            return Err(StorageError::CorruptColumn("varint overflow".into()));
        }
        value |= ((byte & 0x7f) as u64) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

fn read_u64(input: &mut &[u8]) -> Result<u64, StorageError> {
    if input.len() < 8 {
        return Err(StorageError::CorruptColumn("truncated integer".into()));
    }
    let (head, rest) = input.split_at(8);
    *input = rest;
    Ok(u64::from_le_bytes(head.try_into().unwrap()))
}
