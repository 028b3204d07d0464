//! Structural operations shared by the solvers: normalization,
//! transposition, and the dense reference multiply every kernel is
//! checked against.

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Scales each row to sum to 1. Rows that are entirely zero are left
/// zero (the solvers treat them as dangling). Negative entries are
/// rejected because the result is meant to be a stochastic matrix.
pub fn row_normalize(m: &CsrMatrix) -> Result<CsrMatrix> {
    let mut values = m.values.clone();
    for i in 0..m.num_rows {
        let span = m.row_ptr[i]..m.row_ptr[i + 1];
        let mut sum = 0.0;
        for k in span.clone() {
            if m.values[k] < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: m.col_idx[k],
                });
            }
            sum += m.values[k];
        }
        if sum > 0.0 {
            for k in span {
                values[k] /= sum;
            }
        }
    }
    Ok(CsrMatrix {
        num_rows: m.num_rows,
        num_cols: m.num_cols,
        row_ptr: m.row_ptr.clone(),
        col_idx: m.col_idx.clone(),
        values,
    })
}

/// Scales each column to sum to 1; zero columns stay zero.
pub fn column_normalize(m: &CsrMatrix) -> Result<CsrMatrix> {
    let mut col_sums = vec![0.0f64; m.num_cols];
    for i in 0..m.num_rows {
        let (cols, vals) = m.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            if v < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: c });
            }
            col_sums[c] += v;
        }
    }
    let mut values = m.values.clone();
    for (k, &c) in m.col_idx.iter().enumerate() {
        if col_sums[c] > 0.0 {
            values[k] /= col_sums[c];
        }
    }
    Ok(CsrMatrix {
        num_rows: m.num_rows,
        num_cols: m.num_cols,
        row_ptr: m.row_ptr.clone(),
        col_idx: m.col_idx.clone(),
        values,
    })
}

/// Counting transpose. Output rows keep ascending column order, so the
/// result is canonical CSR.
pub fn transpose(m: &CsrMatrix) -> CsrMatrix {
    let mut row_ptr = vec![0usize; m.num_cols + 1];
    for &c in &m.col_idx {
        row_ptr[c + 1] += 1;
    }
    for i in 0..m.num_cols {
        row_ptr[i + 1] += row_ptr[i];
    }
    let mut cursor = row_ptr.clone();
    let mut col_idx = vec![0usize; m.nnz()];
    let mut values = vec![0.0f64; m.nnz()];
    for i in 0..m.num_rows {
        let (cols, vals) = m.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            let slot = cursor[c];
            cursor[c] += 1;
            col_idx[slot] = i;
            values[slot] = v;
        }
    }
    CsrMatrix {
        num_rows: m.num_cols,
        num_cols: m.num_rows,
        row_ptr,
        col_idx,
        values,
    }
}

/// Reference multiply: `y[i] = Σ_j A[i][j] * x[j]` accumulated in fixed
/// left-to-right column order, one row at a time. Intended for test
/// oracles and small inputs, not performance.
pub fn dense_spmv_oracle(m: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.num_cols {
        return Err(Error::DimensionMismatch {
            expected: m.num_cols,
            got: x.len(),
        });
    }
    let mut y = vec![0.0f64; m.num_rows];
    for (i, out) in y.iter_mut().enumerate() {
        let (cols, vals) = m.row(i);
        let mut acc = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            acc += v * x[c];
        }
        *out = acc;
    }
    Ok(y)
}
