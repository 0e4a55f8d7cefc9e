//! Binary document × event incidence matrices.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonicalize::{CanonicalRegistry, UniqueVocabulary};
use crate::error::{Error, Result};
use crate::extraction::EventRecord;
use crate::jsonl;

/// Dense 0/1 matrix with documents as rows and events as columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<u8>,
    col_labels: Vec<String>,
    row_ids: Vec<usize>,
}

impl IncidenceMatrix {
    /// Builds a matrix from row-major cells, checking shape, binary entries
    /// and label uniqueness.
    pub fn new(rows: Vec<Vec<u8>>, col_labels: Vec<String>, row_ids: Vec<usize>) -> Result<Self> {
        let n_cols = col_labels.len();
        if rows.len() != row_ids.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} row ids",
                rows.len(),
                row_ids.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = col_labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidInput(format!("duplicate column label {dup:?}")));
        }
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} cells, expected {n_cols}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|&&v| v > 1) {
                return Err(Error::InvalidInput(format!("row {i} has non-binary cell {v}")));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            data,
            col_labels,
            row_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.data[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n_rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, col: usize) -> Vec<u8> {
        (0..self.n_rows).map(|i| self.get(i, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u8>> {
        (0..self.n_cols).map(|j| self.column(j)).collect()
    }

    pub fn row_sum(&self, row: usize) -> usize {
        self.row(row).iter().map(|&v| v as usize).sum()
    }

    /// Columns as centered-ready reals, for the linear non-Gaussian models.
    pub fn to_f64_columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_cols)
            .map(|j| (0..self.n_rows).map(|i| self.get(i, j) as f64).collect())
            .collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["doc_id".to_string()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.n_rows {
            let mut rec = vec![self.row_ids[i].to_string()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        jsonl::write_atomic(path, self.to_csv_string()?.as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::artifact(path, e))?;
        let header = r.headers().map_err(|e| Error::artifact(path, e))?.clone();
        if header.get(0) != Some("doc_id") {
            return Err(Error::artifact(path, "first column must be doc_id"));
        }
        let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut ids = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::artifact(path, e))?;
            let id = rec[0].parse().map_err(|_| Error::artifact(path, format!("bad doc_id {:?}", &rec[0])))?;
            let row = rec
                .iter()
                .skip(1)
                .map(|c| match c {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::artifact(path, format!("non-binary cell {other:?}"))),
                })
                .collect::<Result<Vec<u8>>>()?;
            ids.push(id);
            rows.push(row);
        }
        Self::new(rows, labels, ids).map_err(|e| Error::artifact(path, e))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(e.to_string())
}

/// `X[i][m] = 1` iff document `i` mentions vocabulary item `m`.
pub fn build_raw_matrix(records: &[EventRecord], vocab: &UniqueVocabulary) -> Result<IncidenceMatrix> {
    let index: std::collections::HashMap<&str, usize> =
        vocab.items.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let mut row = vec![0u8; vocab.len()];
        for m in r.mentions.iter().filter(|m| !m.is_empty()) {
            let j = *index.get(m.as_str()).ok_or_else(|| Error::UnknownMention(m.clone()))?;
            row[j] = 1;
        }
        rows.push(row);
    }
    IncidenceMatrix::new(rows, vocab.items.clone(), records.iter().map(|r| r.doc_id).collect())
}

/// OR-merges raw columns into canonical columns, in canon_id order.
pub fn aggregate(x: &IncidenceMatrix, reg: &CanonicalRegistry) -> Result<IncidenceMatrix> {
    let target: Vec<usize> = x
        .col_labels()
        .iter()
        .map(|l| reg.id_of(l).ok_or_else(|| Error::UnmappedColumn(l.clone())))
        .collect::<Result<_>>()?;
    let c = reg.len();
    let rows = (0..x.n_rows())
        .map(|i| {
            let mut z = vec![0u8; c];
            for (m, &v) in x.row(i).iter().enumerate() {
                z[target[m]] |= v;
            }
            z
        })
        .collect();
    IncidenceMatrix::new(rows, reg.names(), x.row_ids().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    AllZero,
    AllOne,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::AllZero => "all-0",
            DropReason::AllOne => "all-1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub label: String,
    pub reason: DropReason,
}

/// Removes constant columns, keeping the order of the rest. Fails when
/// fewer than two columns survive.
pub fn drop_noninformative(z: &IncidenceMatrix) -> Result<(IncidenceMatrix, Vec<DroppedColumn>)> {
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..z.n_cols() {
        let ones = (0..z.n_rows()).filter(|&i| z.get(i, j) == 1).count();
        let reason = if ones == 0 {
            Some(DropReason::AllZero)
        } else if ones == z.n_rows() {
            Some(DropReason::AllOne)
        } else {
            None
        };
        match reason {
            Some(reason) => dropped.push(DroppedColumn {
                label: z.col_labels()[j].clone(),
                reason,
            }),
            None => keep.push(j),
        }
    }
    if keep.len() < 2 {
        return Err(Error::DegenerateMatrix(format!(
            "{} informative column(s) remain after pruning; need at least 2",
            keep.len()
        )));
    }
    let rows = (0..z.n_rows())
        .map(|i| keep.iter().map(|&j| z.get(i, j)).collect())
        .collect();
    let labels = keep.iter().map(|&j| z.col_labels()[j].clone()).collect();
    Ok((IncidenceMatrix::new(rows, labels, z.row_ids().to_vec())?, dropped))
}
