//! Sparse matrix formats and the conversions between them.
//!
//! All formats are canonical and immutable after construction:
//!
//! * [`CooMatrix`] — triples sorted by (row, col), duplicates merged at
//!   construction time by summing.
//! * [`CsrMatrix`] — row pointers plus column-sorted entries per row.
//! * [`EllMatrix`] — fixed-width rows, stored column major and padded
//!   with zero values and a sentinel column index.
//! * [`HybMatrix`] — ELL for the first `width` entries of every row,
//!   COO for the overflow.

mod generate;
mod market;
mod ops;

pub use generate::{generate_power_law, generate_uniform};
pub use market::{parse_matrix_market, write_matrix_market};
pub use ops::{column_normalize, dense_spmv_oracle, row_normalize, transpose};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Column index stored in padding slots of ELL-style layouts.
pub const ELL_PAD: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    /// (row, col, value), sorted by (row, col), no duplicates.
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    /// Builds a canonical COO matrix: validates index ranges, sorts by
    /// (row, col) and sums duplicate coordinates.
    pub fn new(
        num_rows: usize,
        num_cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &entries {
            if r >= num_rows || c >= num_cols {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) out of bounds for {num_rows}x{num_cols}"
                )));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Ok(CooMatrix {
            num_rows,
            num_cols,
            entries: merged,
        })
    }

    pub fn empty(num_rows: usize, num_cols: usize) -> Self {
        CooMatrix {
            num_rows,
            num_cols,
            entries: Vec::new(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut row_ptr = vec![0usize; self.num_rows + 1];
        for &(r, _, _) in &self.entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..self.num_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        // Entries are already sorted by (row, col), so a single pass keeps
        // columns ascending within each row.
        let col_idx = self.entries.iter().map(|e| e.1).collect();
        let values = self.entries.iter().map(|e| e.2).collect();
        CsrMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Validates the CSR invariants: `row_ptr` monotone with the right
    /// endpoints, columns in range and strictly ascending per row.
    pub fn new(
        num_rows: usize,
        num_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != num_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_ptr length {} for {} rows",
                row_ptr.len(),
                num_rows
            )));
        }
        if row_ptr[0] != 0 || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(Error::InvalidMatrix("row_ptr endpoints".into()));
        }
        if col_idx.len() != values.len() {
            return Err(Error::InvalidMatrix("col_idx/values length mismatch".into()));
        }
        for i in 0..num_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidMatrix(format!("row_ptr not monotone at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidMatrix(format!(
                        "columns not strictly ascending in row {i}"
                    )));
                }
            }
            if let Some(&c) = cols.last() {
                if c >= num_cols {
                    return Err(Error::InvalidMatrix(format!(
                        "column {c} out of bounds in row {i}"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            num_rows,
            num_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_coo(m: &CooMatrix) -> Self {
        m.to_csr()
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn max_row_len(&self) -> usize {
        (0..self.num_rows).map(|i| self.row_len(i)).max().unwrap_or(0)
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut entries = Vec::with_capacity(self.nnz());
        for i in 0..self.num_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                entries.push((i, c, v));
            }
        }
        CooMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            entries,
        }
    }

    /// Identity matrix, handy in tests and walkthroughs.
    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            num_rows: n,
            num_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    /// Slots per row.
    pub width: usize,
    /// Column-major `width * num_rows` slots; padding holds [`ELL_PAD`].
    pub col_idx: Vec<usize>,
    /// Column-major values; padding holds 0.
    pub values: Vec<f64>,
}

impl EllMatrix {
    pub fn from_csr(m: &CsrMatrix, width: usize) -> Result<Self> {
        for i in 0..m.num_rows {
            let len = m.row_len(i);
            if len > width {
                return Err(Error::EllWidthExceeded {
                    row: i,
                    len,
                    width,
                });
            }
        }
        let mut col_idx = vec![ELL_PAD; width * m.num_rows];
        let mut values = vec![0.0; width * m.num_rows];
        for i in 0..m.num_rows {
            let (cols, vals) = m.row(i);
            for (j, (&c, &v)) in cols.iter().zip(vals).enumerate() {
                col_idx[j * m.num_rows + i] = c;
                values[j * m.num_rows + i] = v;
            }
        }
        Ok(EllMatrix {
            num_rows: m.num_rows,
            num_cols: m.num_cols,
            width,
            col_idx,
            values,
        })
    }

    /// Count of real (non-padding) slots.
    pub fn nnz(&self) -> usize {
        self.col_idx.iter().filter(|&&c| c != ELL_PAD).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybMatrix {
    /// First `ell.width` entries of every row.
    pub ell: EllMatrix,
    /// Overflow entries of rows longer than the split width.
    pub coo: CooMatrix,
}

impl HybMatrix {
    /// Splits each row at `width`: the first `width` entries go to the
    /// ELL part, the rest to the COO part.
    pub fn from_csr(m: &CsrMatrix, width: usize) -> Result<Self> {
        let mut ell_col = vec![ELL_PAD; width * m.num_rows];
        let mut ell_val = vec![0.0; width * m.num_rows];
        let mut overflow = Vec::new();
        for i in 0..m.num_rows {
            let (cols, vals) = m.row(i);
            for (j, (&c, &v)) in cols.iter().zip(vals).enumerate() {
                if j < width {
                    ell_col[j * m.num_rows + i] = c;
                    ell_val[j * m.num_rows + i] = v;
                } else {
                    overflow.push((i, c, v));
                }
            }
        }
        Ok(HybMatrix {
            ell: EllMatrix {
                num_rows: m.num_rows,
                num_cols: m.num_cols,
                width,
                col_idx: ell_col,
                values: ell_val,
            },
            coo: CooMatrix {
                num_rows: m.num_rows,
                num_cols: m.num_cols,
                entries: overflow,
            },
        })
    }

    /// Split width in the spirit of the usual HYB heuristic: the largest
    /// `k` such that at least a third of the rows have `k` or more
    /// entries (at least 1 so the ELL part is never degenerate).
    pub fn default_split_width(m: &CsrMatrix) -> usize {
        if m.num_rows == 0 {
            return 1;
        }
        let mut lens: Vec<usize> = (0..m.num_rows).map(|i| m.row_len(i)).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        let k = lens[(m.num_rows - 1) / 3];
        k.max(1)
    }

    pub fn num_rows(&self) -> usize {
        self.ell.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.ell.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.ell.nnz() + self.coo.nnz()
    }
}

/// Row and column degree counts of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub row_degrees: Vec<usize>,
    pub col_degrees: Vec<usize>,
}

impl DegreeHistogram {
    pub fn of(m: &CsrMatrix) -> Self {
        let row_degrees = (0..m.num_rows).map(|i| m.row_len(i)).collect();
        let mut col_degrees = vec![0usize; m.num_cols];
        for &c in &m.col_idx {
            col_degrees[c] += 1;
        }
        DegreeHistogram {
            row_degrees,
            col_degrees,
        }
    }

    /// degree -> how many columns have that degree (degree 0 included).
    pub fn col_degree_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for &d in &self.col_degrees {
            *counts.entry(d).or_insert(0) += 1;
        }
        counts
    }

    /// Both sides of the histogram must account for every entry.
    pub fn total(&self) -> usize {
        self.row_degrees.iter().sum()
    }
}
