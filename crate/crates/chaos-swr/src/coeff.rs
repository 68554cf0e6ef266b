//! Coefficient families `(a_ij)` with zero diagonal and the matrix-derived
//! quantities the tail bounds consume.
//!
//! The matrix is stored dense and row-major; instances of interest are small
//! (enumeration dominates cost, not storage). All reductions run in a fixed
//! row-major order so repeated evaluations are bit-identical.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Square real matrix with structurally zero diagonal, the coefficient
/// family of an off-diagonal quadratic form. Not assumed symmetric.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    n: usize,
    entries: Vec<f64>,
}

/// The four groups of truncated sums used by the split tail bound: the
/// index range is cut at `m = n - delta`, separating a leading block, two
/// cross strips and a trailing block.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedNorms {
    /// Cutoff `m = n - delta`.
    pub m: usize,
    /// `sqrt(sum_{i != j <= m} a_ij^2)` over the leading block.
    pub prefix_sigma: f64,
    /// Per-column norms `sqrt(sum_{i <= m} a_ij^2)` for each column `j > m`.
    pub col_cross: Vec<f64>,
    /// Per-row norms `sqrt(sum_{j <= m} a_ij^2)` for each row `i > m`.
    pub row_cross: Vec<f64>,
    /// `sum_{i != j > m} |a_ij|` over the trailing block.
    pub tail_abs: f64,
}

impl TruncatedNorms {
    /// Sum of all cross-strip norms (columns first, then rows).
    pub fn cross_sum(&self) -> f64 {
        // + 0.0 normalizes the -0.0 an empty float sum produces.
        let cols: f64 = self.col_cross.iter().sum::<f64>() + 0.0;
        let rows: f64 = self.row_cross.iter().sum::<f64>() + 0.0;
        cols + rows
    }
}

impl CoefficientMatrix {
    /// Build from dense rows. With `strict` set, any nonzero diagonal entry
    /// is rejected; otherwise the diagonal is silently zeroed.
    pub fn from_dense(values: &[Vec<f64>], strict: bool) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::MatrixTooSmall(n));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NonSquare {
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
            entries.extend_from_slice(row);
        }
        for i in 0..n {
            let d = entries[i * n + i];
            if d != 0.0 {
                if strict {
                    return Err(Error::NonzeroDiagonal { index: i, value: d });
                }
                entries[i * n + i] = 0.0;
            }
        }
        Ok(Self { n, entries })
    }

    /// Build from an entry function; the diagonal is forced to zero without
    /// calling `f` on it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::MatrixTooSmall(n));
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries[i * n + j] = f(i, j);
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `a_ij` (zero on the diagonal by construction).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Row `i` as a contiguous slice of length `n`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Row-major flat view of all entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Sum of `a_ij^2` over `i != j` with both indices below `m`,
    /// accumulated in row-major order.
    fn prefix_sq_sum(&self, m: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let row = self.row(i);
            for (j, &v) in row[..m].iter().enumerate() {
                if j != i {
                    acc += v * v;
                }
            }
        }
        acc
    }

    /// `sigma = sqrt(sum_{i != j} a_ij^2)`, the full off-diagonal L2 norm.
    pub fn sigma(&self) -> f64 {
        self.prefix_sq_sum(self.n).sqrt()
    }

    /// `max_{i != j} |a_ij|`; zero for the zero matrix.
    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            for (j, &v) in self.row(i).iter().enumerate() {
                if j != i && v.abs() > best {
                    best = v.abs();
                }
            }
        }
        best
    }

    /// All truncated sums at cutoff `m = n - delta`, computed exactly.
    pub fn truncated_norms(&self, delta: usize) -> Result<TruncatedNorms> {
        let n = self.n;
        if delta > n {
            return Err(Error::DeltaOutOfRange { delta, n });
        }
        let m = n - delta;
        let prefix_sigma = self.prefix_sq_sum(m).sqrt();
        // + 0.0 keeps empty sums (m = 0) at +0.0 rather than -0.0.
        let col_cross: Vec<f64> = (m..n)
            .map(|j| ((0..m).map(|i| self.get(i, j).powi(2)).sum::<f64>() + 0.0).sqrt())
            .collect();
        let row_cross: Vec<f64> = (m..n)
            .map(|i| (self.row(i)[..m].iter().map(|v| v * v).sum::<f64>() + 0.0).sqrt())
            .collect();
        let mut tail_abs = 0.0;
        for i in m..n {
            for j in m..n {
                if i != j {
                    tail_abs += self.get(i, j).abs();
                }
            }
        }
        Ok(TruncatedNorms {
            m,
            prefix_sigma,
            col_cross,
            row_cross,
            tail_abs,
        })
    }

    /// Symmetrization `(a_ij + a_ji) / 2`. The chaos value is invariant
    /// under this map since only `a_ij + a_ji` enters each sign product.
    pub fn symmetric_part(&self) -> CoefficientMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries[i * n + j] = (self.get(i, j) + self.get(j, i)) / 2.0;
                }
            }
        }
        Self { n, entries }
    }

    /// Parse an `n x n` plain-decimal CSV (no header) and apply the
    /// `from_dense` contract.
    pub fn from_csv_reader(reader: impl Read, strict: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row: Vec<f64> = record
                .iter()
                .enumerate()
                .map(|(j, field)| {
                    field.parse::<f64>().map_err(|e| Error::Parse {
                        context: format!("matrix entry at row {i}, column {j}"),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Self::from_dense(&rows, strict)
    }

    /// Load a matrix CSV from disk.
    pub fn load_csv(path: impl AsRef<Path>, strict: bool) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file), strict)
    }

    /// Write the matrix as a plain-decimal CSV, one row per line.
    pub fn write_csv(&self, mut writer: impl Write) -> Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(writer, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}
