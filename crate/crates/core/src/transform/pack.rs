//! Workload packing and the flat composite layout.
//!
//! A workload is the unit of work one warp executes: a run of
//! consecutive (descending-length) tile rows whose entry count fits the
//! workload-size budget. Rows are never split. The first row is the
//! longest, so its length is the workload width `w`; the row count is
//! the height `h`. Wide workloads (`w >= h`) are stored row major and
//! reduce like CSR-vector; tall ones are stored column major and run
//! like ELL, one lane per row.
//!
//! Padding happens twice: every row is padded to `w` slots, then the
//! warp-facing dimension (`w` if row major, `h` if column major) is
//! rounded up to a multiple of the warp size. Padding slots carry value
//! 0 and the tile's first column as a sentinel index, so an emulated
//! gather stays inside the tile's cache window.
//!
//! Workloads are laid out back to back in one flat array per tile. A
//! workload whose padded slot count is a multiple of 512 gets 64 dead
//! slots appended (256 bytes of 4-byte elements) so that consecutive
//! workloads never start on the same memory-partition phase — eight
//! partitions of 256-byte stripes repeat every 512 elements, and
//! keeping starts out of phase spreads simultaneous warp accesses
//! across partitions instead of camping on one.

use super::{
    enumerate_tiles, inverse_permutation, sort_columns_desc, sort_rows_desc, extract_tiles, Tile,
};
use crate::error::{Error, Result};
use crate::matrix::{CooMatrix, CsrMatrix, HybMatrix};
use serde::{Deserialize, Serialize};

/// Memory-partition phase length in elements: 8 partitions x 256 bytes
/// at 4 bytes per element.
pub const CAMPING_STRIDE_SLOTS: usize = 512;
/// Dead space appended to break the phase: 256 bytes of 4-byte elements.
pub const CAMPING_PAD_SLOTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StorageOrder {
    RowMajor,
    ColumnMajor,
}

/// One warp's slice of a packed tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    /// Index of the first row within the tile's sorted row list.
    pub row_start: usize,
    /// Original matrix row ids, in packing order.
    pub row_ids: Vec<usize>,
    /// Real entry count per row; non-increasing because rows arrive
    /// sorted by descending length.
    pub row_lens: Vec<usize>,
    /// Total real entries.
    pub nnz: usize,
    /// Width after padding (slots per stored row).
    pub w: usize,
    /// Height after padding (stored rows).
    pub h: usize,
    pub order: StorageOrder,
    /// First slot of this workload in the tile's flat arrays.
    pub offset: usize,
    /// Dead slots appended after this workload.
    pub camping_pad: usize,
}

impl Workload {
    /// Width before padding: the first (longest) row's length.
    pub fn width0(&self) -> usize {
        self.row_lens[0]
    }

    /// Height before padding: the number of real rows.
    pub fn height0(&self) -> usize {
        self.row_ids.len()
    }

    /// Padded slot count (camping pad not included).
    pub fn slots(&self) -> usize {
        self.w * self.h
    }
}

fn round_up(x: usize, multiple: usize) -> usize {
    x.div_ceil(multiple) * multiple
}

/// Greedily packs a tile's rows (already sorted by descending length)
/// into workloads of at most `workload_size` entries, then fixes each
/// workload's stored shape and order.
pub fn pack_workloads(t: &Tile, workload_size: usize, warp_size: usize) -> Result<Vec<Workload>> {
    if warp_size == 0 || workload_size == 0 {
        return Err(Error::InvalidArgument(
            "workload_size and warp_size must be at least 1".into(),
        ));
    }
    let longest = t.longest_row();
    if longest > workload_size {
        return Err(Error::WorkloadTooSmall {
            workload_size,
            longest_row: longest,
        });
    }
    debug_assert!(
        t.rows.windows(2).all(|w| w[0].cols.len() >= w[1].cols.len()),
        "tile rows must be sorted by descending length"
    );

    let mut out = Vec::new();
    let mut start = 0;
    while start < t.rows.len() {
        let mut nnz = 0usize;
        let mut end = start;
        while end < t.rows.len() && nnz + t.rows[end].cols.len() <= workload_size {
            nnz += t.rows[end].cols.len();
            end += 1;
        }
        let w0 = t.rows[start].cols.len();
        let h0 = end - start;
        let (w, h, order) = if w0 >= h0 {
            (round_up(w0, warp_size), h0, StorageOrder::RowMajor)
        } else {
            (w0, round_up(h0, warp_size), StorageOrder::ColumnMajor)
        };
        out.push(Workload {
            row_start: start,
            row_ids: t.rows[start..end].iter().map(|r| r.row_id).collect(),
            row_lens: t.rows[start..end].iter().map(|r| r.cols.len()).collect(),
            nnz,
            w,
            h,
            order,
            offset: 0,
            camping_pad: 0,
        });
        start = end;
    }
    Ok(out)
}

/// Flat slot arrays for a single workload, in its declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadStorage {
    pub values: Vec<f64>,
    pub col_idx: Vec<usize>,
    /// Dead slots the tile layout must append after this workload.
    pub camping_pad: usize,
}

/// Materializes one workload's `w * h` slots. Padding slots hold value
/// 0 and the tile's first column as sentinel.
pub fn layout_storage(t: &Tile, wl: &Workload) -> WorkloadStorage {
    let sentinel = t.start_col;
    let slots = wl.slots();
    let mut values = vec![0.0f64; slots];
    let mut col_idx = vec![sentinel; slots];
    for local in 0..wl.height0() {
        let row = &t.rows[wl.row_start + local];
        for (k, (&c, &v)) in row.cols.iter().zip(&row.values).enumerate() {
            let slot = match wl.order {
                StorageOrder::RowMajor => local * wl.w + k,
                StorageOrder::ColumnMajor => k * wl.h + local,
            };
            col_idx[slot] = c;
            values[slot] = v;
        }
    }
    let camping_pad = if slots.is_multiple_of(CAMPING_STRIDE_SLOTS) {
        CAMPING_PAD_SLOTS
    } else {
        0
    };
    WorkloadStorage {
        values,
        col_idx,
        camping_pad,
    }
}

/// A tile in final executable form: workload descriptors plus the flat
/// value/column arrays they index into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedTile {
    pub tile_id: usize,
    pub start_col: usize,
    pub end_col: usize,
    pub nnz: usize,
    pub workloads: Vec<Workload>,
    pub values: Vec<f64>,
    pub col_idx: Vec<usize>,
}

/// Packs a row-sorted tile: groups rows into workloads and lays them
/// out back to back with anti-camping padding.
pub fn pack_tile(t: &Tile, workload_size: usize, warp_size: usize) -> Result<PackedTile> {
    let mut workloads = pack_workloads(t, workload_size, warp_size)?;
    let mut values = Vec::new();
    let mut col_idx = Vec::new();
    let sentinel = t.start_col;
    for wl in &mut workloads {
        wl.offset = values.len();
        let storage = layout_storage(t, wl);
        wl.camping_pad = storage.camping_pad;
        values.extend_from_slice(&storage.values);
        col_idx.extend_from_slice(&storage.col_idx);
        values.extend(std::iter::repeat_n(0.0, wl.camping_pad));
        col_idx.extend(std::iter::repeat_n(sentinel, wl.camping_pad));
    }
    Ok(PackedTile {
        tile_id: t.tile_id,
        start_col: t.start_col,
        end_col: t.end_col,
        nnz: t.nnz(),
        workloads,
        values,
        col_idx,
    })
}

/// How the sparse leftover columns are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemainderMode {
    /// Pack the remainder like any other tile (the default).
    Composite,
    /// Keep the remainder in HYB form.
    Hyb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybRemainder {
    pub start_col: usize,
    /// Over sorted-domain columns, full matrix height.
    pub hyb: HybMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RemainderPart {
    Composite(PackedTile),
    Hyb(HybRemainder),
}

/// Per-tile workload budgets for a composite build; one budget per
/// dense tile plus one for the remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSizes {
    pub per_tile: Vec<usize>,
    pub remainder: usize,
}

impl WorkloadSizes {
    pub fn uniform(num_tiles: usize, size: usize) -> Self {
        WorkloadSizes {
            per_tile: vec![size; num_tiles],
            remainder: size,
        }
    }
}

/// The fully transformed matrix: sorted columns, packed dense tiles,
/// and the sparse remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiledCompositeMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    pub tile_width: usize,
    pub warp_size: usize,
    pub total_nnz: usize,
    /// old column -> sorted column
    pub col_perm: Vec<usize>,
    pub tiles: Vec<PackedTile>,
    pub remainder: Option<RemainderPart>,
}

/// Runs the full pipeline: sort columns, enumerate tiles, sort rows per
/// tile, pack each tile with its budget from `sizes`.
pub fn build_tile_composite(
    m: &CsrMatrix,
    tile_width: usize,
    sizes: &WorkloadSizes,
    warp_size: usize,
    remainder_mode: RemainderMode,
) -> Result<TiledCompositeMatrix> {
    let sorted = sort_columns_desc(m);
    let layout = enumerate_tiles(&sorted, tile_width)?;
    if sizes.per_tile.len() != layout.spans.len() {
        return Err(Error::InvalidArgument(format!(
            "plan supplies {} tile budgets but the matrix has {} tiles",
            sizes.per_tile.len(),
            layout.spans.len()
        )));
    }
    let (tiles, remainder) = extract_tiles(&sorted, &layout);
    let mut packed = Vec::with_capacity(tiles.len());
    for (tile, &budget) in tiles.into_iter().zip(&sizes.per_tile) {
        let tile = sort_rows_desc(tile);
        packed.push(pack_tile(&tile, budget, warp_size)?);
    }
    let remainder = match remainder {
        None => None,
        Some(rem) => Some(match remainder_mode {
            RemainderMode::Composite => {
                let rem = sort_rows_desc(rem);
                RemainderPart::Composite(pack_tile(&rem, sizes.remainder, warp_size)?)
            }
            RemainderMode::Hyb => {
                let start_col = rem.start_col;
                let mut entries = Vec::with_capacity(rem.nnz());
                for row in &rem.rows {
                    for (&c, &v) in row.cols.iter().zip(&row.values) {
                        entries.push((row.row_id, c, v));
                    }
                }
                let sub = CooMatrix::new(m.num_rows, m.num_cols, entries)?.to_csr();
                let width = HybMatrix::default_split_width(&sub);
                RemainderPart::Hyb(HybRemainder {
                    start_col,
                    hyb: HybMatrix::from_csr(&sub, width)?,
                })
            }
        }),
    };
    let total_nnz = packed.iter().map(|t| t.nnz).sum::<usize>()
        + match &remainder {
            Some(RemainderPart::Composite(t)) => t.nnz,
            Some(RemainderPart::Hyb(h)) => h.hyb.nnz(),
            None => 0,
        };
    let built = TiledCompositeMatrix {
        num_rows: m.num_rows,
        num_cols: m.num_cols,
        tile_width,
        warp_size,
        total_nnz,
        col_perm: sorted.col_perm,
        tiles: packed,
        remainder,
    };
    debug_assert!(built.validate().is_ok());
    Ok(built)
}

impl TiledCompositeMatrix {
    /// Dense tiles plus the composite remainder, if present.
    pub fn composite_parts(&self) -> impl Iterator<Item = &PackedTile> {
        self.tiles.iter().chain(match &self.remainder {
            Some(RemainderPart::Composite(t)) => Some(t),
            _ => None,
        })
    }

    /// Structural integrity check: permutation validity, contiguous
    /// non-overlapping workload segments, shape and padding laws.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.num_cols];
        if self.col_perm.len() != self.num_cols {
            return Err(Error::Integrity("col_perm length".into()));
        }
        for &p in &self.col_perm {
            if p >= self.num_cols || seen[p] {
                return Err(Error::Integrity("col_perm is not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut nnz = 0usize;
        for tile in self.composite_parts() {
            if tile.start_col >= tile.end_col || tile.end_col > self.num_cols {
                return Err(Error::Integrity(format!(
                    "tile {} span [{}, {}) out of range",
                    tile.tile_id, tile.start_col, tile.end_col
                )));
            }
            let mut expected = 0usize;
            let mut tile_nnz = 0usize;
            for (i, wl) in tile.workloads.iter().enumerate() {
                if wl.offset != expected {
                    return Err(Error::Integrity(format!(
                        "tile {} workload {} starts at {} instead of {} (overlap or gap)",
                        tile.tile_id, i, wl.offset, expected
                    )));
                }
                if wl.row_ids.is_empty() || wl.row_ids.len() != wl.row_lens.len() {
                    return Err(Error::Integrity("workload row bookkeeping".into()));
                }
                let w0 = wl.width0();
                let h0 = wl.height0();
                let row_major = wl.order == StorageOrder::RowMajor;
                if row_major != (w0 >= h0) {
                    return Err(Error::Integrity(format!(
                        "workload order contradicts its {w0}x{h0} shape"
                    )));
                }
                let shape_ok = if row_major {
                    wl.w % self.warp_size == 0 && wl.w >= w0 && wl.h == h0
                } else {
                    wl.h % self.warp_size == 0 && wl.h >= h0 && wl.w == w0
                };
                if !shape_ok {
                    return Err(Error::Integrity("workload padding law violated".into()));
                }
                if wl.row_lens.windows(2).any(|p| p[0] < p[1])
                    || wl.row_lens.iter().any(|&l| l == 0 || l > wl.w)
                    || wl.nnz != wl.row_lens.iter().sum::<usize>()
                {
                    return Err(Error::Integrity("workload row lengths".into()));
                }
                let pad_due = wl.slots() % CAMPING_STRIDE_SLOTS == 0;
                if pad_due != (wl.camping_pad == CAMPING_PAD_SLOTS)
                    || (!pad_due && wl.camping_pad != 0)
                {
                    return Err(Error::Integrity("camping pad law violated".into()));
                }
                for &r in &wl.row_ids {
                    if r >= self.num_rows {
                        return Err(Error::Integrity(format!("row id {r} out of range")));
                    }
                }
                expected += wl.slots() + wl.camping_pad;
                tile_nnz += wl.nnz;
            }
            if tile.values.len() != expected || tile.col_idx.len() != expected {
                return Err(Error::Integrity(format!(
                    "tile {} flat arrays hold {} slots, descriptors claim {}",
                    tile.tile_id,
                    tile.values.len(),
                    expected
                )));
            }
            if tile.nnz != tile_nnz {
                return Err(Error::Integrity("tile nnz disagrees with workloads".into()));
            }
            for &c in &tile.col_idx {
                if c < tile.start_col || c >= tile.end_col {
                    return Err(Error::Integrity(format!(
                        "tile {} references column {} outside [{}, {})",
                        tile.tile_id, c, tile.start_col, tile.end_col
                    )));
                }
            }
            nnz += tile.nnz;
        }
        if let Some(RemainderPart::Hyb(h)) = &self.remainder {
            nnz += h.hyb.nnz();
        }
        if nnz != self.total_nnz {
            return Err(Error::Integrity("total nnz disagrees with parts".into()));
        }
        Ok(())
    }

    /// Reconstructs the original-coordinate entries. Exact inverse of
    /// the build: every real slot maps back through the column
    /// permutation, padding is skipped by row length.
    pub fn to_coo(&self) -> Result<CooMatrix> {
        let inv = inverse_permutation(&self.col_perm);
        let mut entries = Vec::with_capacity(self.total_nnz);
        for tile in self.composite_parts() {
            for wl in &tile.workloads {
                for local in 0..wl.height0() {
                    for k in 0..wl.row_lens[local] {
                        let slot = wl.offset
                            + match wl.order {
                                StorageOrder::RowMajor => local * wl.w + k,
                                StorageOrder::ColumnMajor => k * wl.h + local,
                            };
                        entries.push((
                            wl.row_ids[local],
                            inv[tile.col_idx[slot]],
                            tile.values[slot],
                        ));
                    }
                }
            }
        }
        if let Some(RemainderPart::Hyb(h)) = &self.remainder {
            let ell = &h.hyb.ell;
            for slot in 0..ell.col_idx.len() {
                let c = ell.col_idx[slot];
                if c != crate::matrix::ELL_PAD {
                    entries.push((slot % ell.num_rows, inv[c], ell.values[slot]));
                }
            }
            for &(r, c, v) in &h.hyb.coo.entries {
                entries.push((r, inv[c], v));
            }
        }
        CooMatrix::new(self.num_rows, self.num_cols, entries)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TileCompositeFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            matrix: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TileCompositeFile = serde_json::from_str(text)?;
        if file.format != FORMAT_NAME {
            return Err(Error::Unsupported(format!(
                "expected format '{FORMAT_NAME}', got '{}'",
                file.format
            )));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "tile-composite version {} (this build reads {FORMAT_VERSION})",
                file.version
            )));
        }
        file.matrix.validate()?;
        Ok(file.matrix)
    }
}

pub const FORMAT_NAME: &str = "tile-composite";
pub const FORMAT_VERSION: u32 = 1;

/// On-disk wrapper: format tag and version first, then the matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileCompositeFile {
    pub format: String,
    pub version: u32,
    pub matrix: TiledCompositeMatrix,
}

/// Tiled matrix kept in per-tile COO form: same column sort and tiling
/// as the composite build, but each dense tile stays a row-sorted
/// triple list and the remainder is HYB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiledCooMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    pub tile_width: usize,
    pub total_nnz: usize,
    pub col_perm: Vec<usize>,
    pub tiles: Vec<CooTile>,
    pub remainder: Option<HybRemainder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooTile {
    pub tile_id: usize,
    pub start_col: usize,
    pub end_col: usize,
    /// (row, sorted column, value), sorted by row then column.
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn build_tile_coo(m: &CsrMatrix, tile_width: usize) -> Result<TiledCooMatrix> {
    let sorted = sort_columns_desc(m);
    let layout = enumerate_tiles(&sorted, tile_width)?;
    let (tiles, remainder) = extract_tiles(&sorted, &layout);
    let coo_tiles = tiles
        .into_iter()
        .map(|t| {
            let mut entries = Vec::with_capacity(t.nnz());
            for row in &t.rows {
                for (&c, &v) in row.cols.iter().zip(&row.values) {
                    entries.push((row.row_id, c, v));
                }
            }
            CooTile {
                tile_id: t.tile_id,
                start_col: t.start_col,
                end_col: t.end_col,
                entries,
            }
        })
        .collect::<Vec<_>>();
    let remainder = match remainder {
        None => None,
        Some(rem) => {
            let mut entries = Vec::with_capacity(rem.nnz());
            for row in &rem.rows {
                for (&c, &v) in row.cols.iter().zip(&row.values) {
                    entries.push((row.row_id, c, v));
                }
            }
            let sub = CooMatrix::new(m.num_rows, m.num_cols, entries)?.to_csr();
            let width = HybMatrix::default_split_width(&sub);
            Some(HybRemainder {
                start_col: rem.start_col,
                hyb: HybMatrix::from_csr(&sub, width)?,
            })
        }
    };
    let total_nnz = coo_tiles.iter().map(|t| t.entries.len()).sum::<usize>()
        + remainder.as_ref().map_or(0, |r| r.hyb.nnz());
    Ok(TiledCooMatrix {
        num_rows: m.num_rows,
        num_cols: m.num_cols,
        tile_width,
        total_nnz,
        col_perm: sorted.col_perm,
        tiles: coo_tiles,
        remainder,
    })
}

/// A fixed 8x8 walkthrough matrix shared by tests across the crate:
/// sorted column lengths [6, 6, 2, 2, 1, 1, 1, 1], designed for
/// tile_width 2 and warp 2.
#[cfg(test)]
pub(crate) fn walkthrough_matrix() -> crate::matrix::CsrMatrix {
    let mut entries = Vec::new();
    let val = |r: usize, c: usize| (r * 8 + c + 1) as f64;
    // original column 1: rows 0-5; original column 3: rows 0-3, 6, 7
    for r in 0..6 {
        entries.push((r, 1, val(r, 1)));
    }
    for r in [0, 1, 2, 3, 6, 7] {
        entries.push((r, 3, val(r, 3)));
    }
    // two medium columns
    for r in [0, 1] {
        entries.push((r, 2, val(r, 2)));
    }
    for r in [2, 3] {
        entries.push((r, 5, val(r, 5)));
    }
    // four singleton columns
    entries.push((4, 0, val(4, 0)));
    entries.push((5, 4, val(5, 4)));
    entries.push((6, 6, val(6, 6)));
    entries.push((7, 7, val(7, 7)));
    crate::matrix::CooMatrix::new(8, 8, entries).unwrap().to_csr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{generate_power_law, generate_uniform, CooMatrix};
    use crate::transform::TileRow;

    fn tile_with_lengths(lengths: &[usize]) -> Tile {
        // rows over columns [0, max); row i gets `len` leading columns
        let rows = lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| TileRow {
                row_id: i,
                cols: (0..len).collect(),
                values: vec![1.0; len],
            })
            .collect();
        Tile {
            tile_id: 0,
            start_col: 0,
            end_col: lengths.iter().copied().max().unwrap_or(1),
            rows,
        }
    }

    #[test]
    fn packs_descending_rows_into_budgeted_workloads() {
        // the walkthrough shape: lengths [2,2,2,2,1,1,1,1], budget 4, warp 2
        let t = tile_with_lengths(&[2, 2, 2, 2, 1, 1, 1, 1]);
        let wls = pack_workloads(&t, 4, 2).unwrap();
        let shapes: Vec<(usize, usize, StorageOrder)> =
            wls.iter().map(|w| (w.w, w.h, w.order)).collect();
        assert_eq!(
            shapes,
            vec![
                (2, 2, StorageOrder::RowMajor),
                (2, 2, StorageOrder::RowMajor),
                (1, 4, StorageOrder::ColumnMajor),
            ]
        );
        assert_eq!(wls[2].height0(), 4); // h was already a warp multiple
    }

    #[test]
    fn single_wide_row_pads_to_warp_width() {
        let t = tile_with_lengths(&[5]);
        let wls = pack_workloads(&t, 5, 32).unwrap();
        assert_eq!(wls.len(), 1);
        assert_eq!((wls[0].w, wls[0].h), (32, 1));
        assert_eq!(wls[0].order, StorageOrder::RowMajor);
        assert_eq!(wls[0].width0(), 5);
    }

    #[test]
    fn rows_are_never_split() {
        let t = tile_with_lengths(&[6, 2]);
        match pack_workloads(&t, 4, 2) {
            Err(Error::WorkloadTooSmall {
                workload_size,
                longest_row,
            }) => assert_eq!((workload_size, longest_row), (4, 6)),
            other => panic!("expected WorkloadTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn tall_workload_pads_height_to_warp() {
        // seven single-entry rows, budget 7, warp 4 -> 1x7 grows to 1x8
        let t = tile_with_lengths(&[1, 1, 1, 1, 1, 1, 1]);
        let wls = pack_workloads(&t, 7, 4).unwrap();
        assert_eq!(wls.len(), 1);
        assert_eq!((wls[0].w, wls[0].h), (1, 8));
        assert_eq!(wls[0].order, StorageOrder::ColumnMajor);
    }

    #[test]
    fn layout_applies_camping_pad_at_512() {
        // one row of 512 entries (budget 512, warp 32) -> 512x1 row
        // major, exactly 512 slots, pad due; a second 1-entry row lands
        // at offset 576
        let mut lengths = vec![512usize, 1];
        let t = {
            let rows = lengths
                .drain(..)
                .enumerate()
                .map(|(i, len)| TileRow {
                    row_id: i,
                    cols: (0..len).collect(),
                    values: vec![1.0; len],
                })
                .collect();
            Tile {
                tile_id: 0,
                start_col: 0,
                end_col: 512,
                rows,
            }
        };
        let packed = pack_tile(&t, 512, 32).unwrap();
        assert_eq!(packed.workloads[0].slots(), 512);
        assert_eq!(packed.workloads[0].camping_pad, CAMPING_PAD_SLOTS);
        assert_eq!(packed.workloads[1].offset, 576);
    }

    #[test]
    fn no_pad_when_phase_differs() {
        // 511 slots with warp 1: 511 % 512 != 0, no pad
        let t = tile_with_lengths(&[511]);
        let packed = pack_tile(&t, 511, 1).unwrap();
        assert_eq!(packed.workloads[0].slots(), 511);
        assert_eq!(packed.workloads[0].camping_pad, 0);
    }

    #[test]
    fn consecutive_offsets_never_share_partition_phase() {
        for seed in 0..6u64 {
            let m = generate_power_law(400, 2.0, 4000, seed).unwrap().to_csr();
            let sorted = sort_columns_desc(&m);
            let layout = enumerate_tiles(&sorted, 32).unwrap();
            let (tiles, rem) = extract_tiles(&sorted, &layout);
            for tile in tiles.into_iter().chain(rem) {
                let tile = sort_rows_desc(tile);
                let budget = tile.longest_row().max(24);
                let packed = pack_tile(&tile, budget, 8).unwrap();
                let offsets: Vec<usize> =
                    packed.workloads.iter().map(|w| w.offset).collect();
                for pair in offsets.windows(2) {
                    assert_ne!((pair[1] - pair[0]) % CAMPING_STRIDE_SLOTS, 0);
                }
            }
        }
    }

    #[test]
    fn shape_law_holds_on_random_tiles() {
        let m = generate_uniform(300, 120, 2400, 3).to_csr();
        let sorted = sort_columns_desc(&m);
        let layout = enumerate_tiles(&sorted, 16).unwrap();
        let (tiles, rem) = extract_tiles(&sorted, &layout);
        for tile in tiles.into_iter().chain(rem) {
            let tile = sort_rows_desc(tile);
            let budget = tile.longest_row().max(10);
            for wl in pack_workloads(&tile, budget, 4).unwrap() {
                let row_major = wl.order == StorageOrder::RowMajor;
                assert_eq!(row_major, wl.width0() >= wl.height0());
                if row_major {
                    assert_eq!(wl.w % 4, 0);
                    assert_eq!(wl.h, wl.height0());
                } else {
                    assert_eq!(wl.h % 4, 0);
                    assert_eq!(wl.w, wl.width0());
                }
                assert!(wl.nnz <= budget);
            }
        }
    }

    #[test]
    fn walkthrough_build_produces_expected_workloads() {
        let m = walkthrough_matrix();
        let sorted = sort_columns_desc(&m);
        assert_eq!(sorted.col_lengths, vec![6, 6, 2, 2, 1, 1, 1, 1]);
        let built = build_tile_composite(
            &m,
            2,
            &WorkloadSizes::uniform(2, 4),
            2,
            RemainderMode::Composite,
        )
        .unwrap();
        assert_eq!(built.tiles.len(), 2);
        let shapes: Vec<(usize, usize, StorageOrder)> = built.tiles[0]
            .workloads
            .iter()
            .map(|w| (w.w, w.h, w.order))
            .collect();
        assert_eq!(
            shapes,
            vec![
                (2, 2, StorageOrder::RowMajor),
                (2, 2, StorageOrder::RowMajor),
                (1, 4, StorageOrder::ColumnMajor),
            ]
        );
        // tile 0 holds the two heavy columns; rows 0-3 have both, 4-7 one
        assert_eq!(built.tiles[0].workloads[0].row_ids, vec![0, 1]);
        assert_eq!(built.tiles[0].workloads[1].row_ids, vec![2, 3]);
        assert_eq!(built.tiles[0].workloads[2].row_ids, vec![4, 5, 6, 7]);
        assert!(built.remainder.is_some());
        assert_eq!(built.to_coo().unwrap(), m.to_coo());
    }

    #[test]
    fn composite_build_is_lossless_both_modes() {
        for seed in [1u64, 9, 33] {
            let m = generate_power_law(150, 2.2, 1600, seed).unwrap().to_csr();
            for mode in [RemainderMode::Composite, RemainderMode::Hyb] {
                let sorted = sort_columns_desc(&m);
                let layout = enumerate_tiles(&sorted, 8).unwrap();
                let sizes = WorkloadSizes::uniform(layout.spans.len(), 64);
                let built = build_tile_composite(&m, 8, &sizes, 4, mode).unwrap();
                built.validate().unwrap();
                assert_eq!(built.to_coo().unwrap(), m.to_coo(), "mode {mode:?}");
            }
        }
    }

    #[test]
    fn budget_count_must_match_tile_count() {
        let m = walkthrough_matrix();
        let sizes = WorkloadSizes {
            per_tile: vec![4],
            remainder: 4,
        };
        assert!(build_tile_composite(&m, 2, &sizes, 2, RemainderMode::Composite).is_err());
    }

    #[test]
    fn json_round_trip_and_integrity_check() {
        let m = walkthrough_matrix();
        let built = build_tile_composite(
            &m,
            2,
            &WorkloadSizes::uniform(2, 4),
            2,
            RemainderMode::Composite,
        )
        .unwrap();
        let text = built.to_json().unwrap();
        let back = TiledCompositeMatrix::from_json(&text).unwrap();
        assert_eq!(back, built);

        // corrupt an offset -> integrity error
        let mut broken = built.clone();
        broken.tiles[0].workloads[1].offset += 1;
        let text = broken.to_json().unwrap();
        match TiledCompositeMatrix::from_json(&text) {
            Err(Error::Integrity(msg)) => assert!(msg.contains("overlap")),
            other => panic!("expected integrity error, got {other:?}"),
        }

        // future version -> unsupported
        let text = built.to_json().unwrap().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            TiledCompositeMatrix::from_json(&text),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tile_coo_build_is_lossless() {
        let m = generate_power_law(200, 2.1, 2000, 4).unwrap().to_csr();
        let tiled = build_tile_coo(&m, 16).unwrap();
        let inv = inverse_permutation(&tiled.col_perm);
        let mut entries = Vec::new();
        for t in &tiled.tiles {
            for w in t.entries.windows(2) {
                assert!(w[0].0 <= w[1].0, "tile entries must be row sorted");
            }
            for &(r, c, v) in &t.entries {
                assert!(c >= t.start_col && c < t.end_col);
                entries.push((r, inv[c], v));
            }
        }
        if let Some(rem) = &tiled.remainder {
            let ell = &rem.hyb.ell;
            for slot in 0..ell.col_idx.len() {
                if ell.col_idx[slot] != crate::matrix::ELL_PAD {
                    entries.push((slot % ell.num_rows, inv[ell.col_idx[slot]], ell.values[slot]));
                }
            }
            for &(r, c, v) in &rem.hyb.coo.entries {
                entries.push((r, inv[c], v));
            }
        }
        let back = CooMatrix::new(200, 200, entries).unwrap();
        assert_eq!(back, m.to_coo());
        assert_eq!(tiled.total_nnz, m.nnz());
    }
}
