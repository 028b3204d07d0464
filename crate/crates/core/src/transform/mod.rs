//! The tile-composite transformation pipeline.
//!
//! A sparse matrix goes through four steps before execution:
//!
//! 1. [`sort_columns_desc`] — columns reordered by descending entry
//!    count so heavy columns cluster on the left.
//! 2. [`enumerate_tiles`] — fixed-width column tiles are carved off the
//!    left edge while the leading column of the next tile still has at
//!    least two entries; everything to the right becomes the sparse
//!    remainder. A tile's worth of x fits in the fast constant-size
//!    cache, which is the whole point of the exercise.
//! 3. [`sort_rows_desc`] — within a tile, rows ordered by descending
//!    in-tile length so rows of similar length pack together.
//! 4. [`pack_workloads`] / [`pack_tile`] — greedy packing of rows into
//!    fixed-budget workloads, each stored row major (wide shapes) or
//!    column major (tall shapes), padded to the warp width, and laid
//!    out back to back with anti-partition-camping dead space.
//!
//! [`build_tile_composite`] runs the full pipeline; [`build_tile_coo`]
//! stops after tiling and keeps per-tile COO for the baseline tiled
//! kernel.

mod pack;

pub use pack::{
    build_tile_composite, build_tile_coo, pack_tile, pack_workloads, CooTile, HybRemainder,
    PackedTile, RemainderMode, RemainderPart, StorageOrder, TileCompositeFile, TiledCompositeMatrix,
    TiledCooMatrix, Workload, WorkloadSizes, CAMPING_PAD_SLOTS, CAMPING_STRIDE_SLOTS,
};
#[cfg(test)]
pub(crate) use pack::walkthrough_matrix;

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use serde::{Deserialize, Serialize};

/// Default tile width in columns: a 256 KB fast cache holding 4-byte
/// elements fits 64K x-vector entries.
pub const DEFAULT_TILE_WIDTH: usize = 65536;

/// A matrix whose columns have been permuted into descending-length
/// order. `col_perm[old] = new`; ties broken by ascending original
/// index so the sort is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSortedMatrix {
    /// The matrix with columns renumbered into sorted order.
    pub csr: CsrMatrix,
    /// old column index -> sorted column index
    pub col_perm: Vec<usize>,
    /// entry count per sorted column; non-increasing
    pub col_lengths: Vec<usize>,
}

pub fn sort_columns_desc(m: &CsrMatrix) -> ColumnSortedMatrix {
    let mut lengths = vec![0usize; m.num_cols];
    for &c in &m.col_idx {
        lengths[c] += 1;
    }
    let mut order: Vec<usize> = (0..m.num_cols).collect();
    order.sort_by(|&a, &b| lengths[b].cmp(&lengths[a]).then(a.cmp(&b)));
    let mut col_perm = vec![0usize; m.num_cols];
    for (new, &old) in order.iter().enumerate() {
        col_perm[old] = new;
    }
    let col_lengths: Vec<usize> = order.iter().map(|&old| lengths[old]).collect();

    // Remap each row and restore ascending column order within it.
    let mut col_idx = Vec::with_capacity(m.nnz());
    let mut values = Vec::with_capacity(m.nnz());
    for i in 0..m.num_rows {
        let (cols, vals) = m.row(i);
        let mut row: Vec<(usize, f64)> = cols
            .iter()
            .zip(vals)
            .map(|(&c, &v)| (col_perm[c], v))
            .collect();
        row.sort_by_key(|e| e.0);
        for (c, v) in row {
            col_idx.push(c);
            values.push(v);
        }
    }
    ColumnSortedMatrix {
        csr: CsrMatrix {
            num_rows: m.num_rows,
            num_cols: m.num_cols,
            row_ptr: m.row_ptr.clone(),
            col_idx,
            values,
        },
        col_perm,
        col_lengths,
    }
}

/// Inverse of a permutation given as `perm[from] = to`.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (from, &to) in perm.iter().enumerate() {
        inv[to] = from;
    }
    inv
}

/// Reorders an x vector into the sorted column domain.
pub fn permute_x(col_perm: &[usize], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; x.len()];
    for (old, &new) in col_perm.iter().enumerate() {
        out[new] = x[old];
    }
    out
}

/// Column spans of the dense tiles plus the start of the sparse
/// remainder, all in sorted-column coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileLayout {
    pub tile_width: usize,
    /// [start, end) per dense tile
    pub spans: Vec<(usize, usize)>,
    /// first sorted column owned by the sparse remainder (== num_cols
    /// when the tiles cover everything)
    pub sparse_start_col: usize,
}

/// Carves fixed-width tiles off the sorted matrix. Tiling stops at
/// `ceil(num_cols / tile_width)` tiles or at the first tile whose
/// leading column has one entry or fewer — columns to the right are
/// at most as long, so no reuse is left to exploit.
pub fn enumerate_tiles(m: &ColumnSortedMatrix, tile_width: usize) -> Result<TileLayout> {
    if tile_width == 0 {
        return Err(Error::InvalidArgument("tile_width must be at least 1".into()));
    }
    let n = m.csr.num_cols;
    let max_tiles = n.div_ceil(tile_width);
    let mut spans = Vec::new();
    for tile in 0..max_tiles {
        let start = tile * tile_width;
        if m.col_lengths[start] <= 1 {
            break;
        }
        spans.push((start, (start + tile_width).min(n)));
    }
    let sparse_start_col = spans.last().map_or(0, |s| s.1);
    Ok(TileLayout {
        tile_width,
        spans,
        sparse_start_col,
    })
}

/// One dense tile before packing: the rows that touch its column span,
/// each row's entries in ascending sorted-column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub tile_id: usize,
    pub start_col: usize,
    pub end_col: usize,
    pub rows: Vec<TileRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileRow {
    /// Original matrix row id.
    pub row_id: usize,
    /// Sorted-domain column indices, ascending.
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tile {
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.cols.len()).sum()
    }

    pub fn longest_row(&self) -> usize {
        self.rows.iter().map(|r| r.cols.len()).max().unwrap_or(0)
    }

    /// In-tile row lengths in current row order.
    pub fn row_lengths(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.cols.len()).collect()
    }
}

/// Splits the sorted matrix into the laid-out tiles plus (optionally)
/// one trailing tile holding the sparse remainder columns. Tiles with
/// no entries are still emitted for the dense spans (they cannot occur
/// via [`enumerate_tiles`], which requires a leading column of length
/// at least 2), but an empty remainder yields `None`.
pub fn extract_tiles(m: &ColumnSortedMatrix, layout: &TileLayout) -> (Vec<Tile>, Option<Tile>) {
    let n = m.csr.num_cols;
    let mut tiles: Vec<Tile> = layout
        .spans
        .iter()
        .enumerate()
        .map(|(id, &(start, end))| Tile {
            tile_id: id,
            start_col: start,
            end_col: end,
            rows: Vec::new(),
        })
        .collect();
    let mut remainder = if layout.sparse_start_col < n {
        Some(Tile {
            tile_id: tiles.len(),
            start_col: layout.sparse_start_col,
            end_col: n,
            rows: Vec::new(),
        })
    } else {
        None
    };

    let sparse_start = layout.sparse_start_col;
    for i in 0..m.csr.num_rows {
        let (cols, vals) = m.csr.row(i);
        let mut k = 0;
        while k < cols.len() {
            let c = cols[k];
            let (target, end) = if c < sparse_start {
                let t = c / layout.tile_width;
                (Some(t), layout.spans[t].1)
            } else {
                (None, n)
            };
            let mut seg_cols = Vec::new();
            let mut seg_vals = Vec::new();
            while k < cols.len() && cols[k] < end {
                seg_cols.push(cols[k]);
                seg_vals.push(vals[k]);
                k += 1;
            }
            let row = TileRow {
                row_id: i,
                cols: seg_cols,
                values: seg_vals,
            };
            match target {
                Some(t) => tiles[t].rows.push(row),
                None => {
                    if let Some(rem) = remainder.as_mut() {
                        rem.rows.push(row);
                    }
                }
            }
        }
    }
    if remainder.as_ref().is_some_and(|r| r.rows.is_empty()) {
        remainder = None;
    }
    (tiles, remainder)
}

/// Orders a tile's rows by descending in-tile length, ties by ascending
/// original row id.
pub fn sort_rows_desc(mut t: Tile) -> Tile {
    t.rows
        .sort_by(|a, b| b.cols.len().cmp(&a.cols.len()).then(a.row_id.cmp(&b.row_id)));
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{generate_uniform, CooMatrix};

    fn csr_from(entries: Vec<(usize, usize, f64)>, rows: usize, cols: usize) -> CsrMatrix {
        CooMatrix::new(rows, cols, entries).unwrap().to_csr()
    }

    #[test]
    fn sorts_columns_by_descending_length() {
        // column lengths [1, 3, 2]
        let m = csr_from(
            vec![
                (0, 1, 1.0),
                (1, 1, 2.0),
                (2, 1, 3.0),
                (0, 2, 4.0),
                (1, 2, 5.0),
                (2, 0, 6.0),
            ],
            3,
            3,
        );
        let sorted = sort_columns_desc(&m);
        assert_eq!(sorted.col_perm, vec![2, 0, 1]);
        assert_eq!(sorted.col_lengths, vec![3, 2, 1]);
    }

    #[test]
    fn already_sorted_gets_identity_permutation() {
        let m = csr_from(
            vec![(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0)],
            2,
            3,
        );
        let sorted = sort_columns_desc(&m);
        assert_eq!(sorted.col_perm, vec![0, 1, 2]);
        assert_eq!(sorted.csr, m);
    }

    #[test]
    fn ties_break_by_original_index() {
        let m = csr_from(vec![(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)], 1, 3);
        let sorted = sort_columns_desc(&m);
        assert_eq!(sorted.col_perm, vec![0, 1, 2]);
    }

    #[test]
    fn inverse_permutation_restores_original_columns() {
        let m = generate_uniform(40, 25, 200, 17).to_csr();
        let sorted = sort_columns_desc(&m);
        let inv = inverse_permutation(&sorted.col_perm);
        let mut restored: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..sorted.csr.num_rows {
            let (cols, vals) = sorted.csr.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                restored.push((i, inv[c], v));
            }
        }
        let restored = CooMatrix::new(40, 25, restored).unwrap();
        assert_eq!(restored, m.to_coo());
    }

    #[test]
    fn permute_x_follows_the_columns() {
        let m = csr_from(
            vec![
                (0, 1, 1.0),
                (1, 1, 2.0),
                (2, 1, 3.0),
                (0, 2, 4.0),
                (1, 2, 5.0),
                (2, 0, 6.0),
            ],
            3,
            3,
        );
        let sorted = sort_columns_desc(&m);
        // old order [a, b, c]; col 1 is the heaviest so b leads
        let xs = permute_x(&sorted.col_perm, &[10.0, 20.0, 30.0]);
        assert_eq!(xs, vec![20.0, 30.0, 10.0]);
    }

    #[test]
    fn tile_enumeration_stops_at_single_entry_columns() {
        // sorted col lengths [3, 2, 2, 1, 1]
        let mut entries = Vec::new();
        for r in 0..3 {
            entries.push((r, 0, 1.0));
        }
        for r in 0..2 {
            entries.push((r, 1, 1.0));
            entries.push((r, 2, 1.0));
        }
        entries.push((0, 3, 1.0));
        entries.push((1, 4, 1.0));
        let m = csr_from(entries, 3, 5);
        let sorted = sort_columns_desc(&m);
        assert_eq!(sorted.col_lengths, vec![3, 2, 2, 1, 1]);
        let layout = enumerate_tiles(&sorted, 2).unwrap();
        assert_eq!(layout.spans, vec![(0, 2), (2, 4)]);
        assert_eq!(layout.sparse_start_col, 4);
    }

    #[test]
    fn full_coverage_leaves_empty_remainder() {
        // 8 columns, every column length 2, tile_width 2 -> 4 tiles
        let mut entries = Vec::new();
        for c in 0..8 {
            entries.push((0, c, 1.0));
            entries.push((1, c, 1.0));
        }
        let m = csr_from(entries, 2, 8);
        let sorted = sort_columns_desc(&m);
        let layout = enumerate_tiles(&sorted, 2).unwrap();
        assert_eq!(layout.spans.len(), 4);
        assert_eq!(layout.sparse_start_col, 8);
        let (tiles, remainder) = extract_tiles(&sorted, &layout);
        assert_eq!(tiles.len(), 4);
        assert!(remainder.is_none());
    }

    #[test]
    fn all_short_columns_mean_no_tiles() {
        let m = csr_from(vec![(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], 3, 3);
        let sorted = sort_columns_desc(&m);
        let layout = enumerate_tiles(&sorted, 2).unwrap();
        assert!(layout.spans.is_empty());
        assert_eq!(layout.sparse_start_col, 0);
        let (tiles, remainder) = extract_tiles(&sorted, &layout);
        assert!(tiles.is_empty());
        let rem = remainder.unwrap();
        assert_eq!(rem.nnz(), 3);
        assert_eq!((rem.start_col, rem.end_col), (0, 3));
    }

    #[test]
    fn partial_final_tile_is_clipped() {
        // 5 columns all length 2, tile_width 2 -> ceil(5/2) = 3 tiles,
        // the last covering a single column
        let mut entries = Vec::new();
        for c in 0..5 {
            entries.push((0, c, 1.0));
            entries.push((1, c, 1.0));
        }
        let m = csr_from(entries, 2, 5);
        let sorted = sort_columns_desc(&m);
        let layout = enumerate_tiles(&sorted, 2).unwrap();
        assert_eq!(layout.spans, vec![(0, 2), (2, 4), (4, 5)]);
    }

    #[test]
    fn extraction_splits_rows_by_tile_and_loses_nothing() {
        let m = generate_uniform(30, 40, 300, 5).to_csr();
        let sorted = sort_columns_desc(&m);
        let layout = enumerate_tiles(&sorted, 8).unwrap();
        let (tiles, remainder) = extract_tiles(&sorted, &layout);
        let mut total = 0;
        for t in tiles.iter().chain(remainder.iter()) {
            for row in &t.rows {
                assert!(!row.cols.is_empty());
                for &c in &row.cols {
                    assert!(c >= t.start_col && c < t.end_col);
                }
                total += row.cols.len();
            }
        }
        assert_eq!(total, m.nnz());
    }

    #[test]
    fn row_sort_is_stable_descending() {
        let t = Tile {
            tile_id: 0,
            start_col: 0,
            end_col: 4,
            rows: vec![
                TileRow { row_id: 0, cols: vec![0], values: vec![1.0] },
                TileRow { row_id: 1, cols: vec![0, 1], values: vec![1.0, 1.0] },
                TileRow { row_id: 2, cols: vec![0], values: vec![1.0] },
                TileRow { row_id: 3, cols: vec![0, 1, 2], values: vec![1.0, 1.0, 1.0] },
            ],
        };
        let sorted = sort_rows_desc(t);
        let order: Vec<usize> = sorted.rows.iter().map(|r| r.row_id).collect();
        assert_eq!(order, vec![3, 1, 0, 2]);
        assert_eq!(sorted.row_lengths(), vec![3, 2, 1, 1]);
    }
}
