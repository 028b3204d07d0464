//! Kernels over the tiled representations. Tiles execute in ascending
//! order with a barrier (modeled as a kernel launch count) between
//! them; partial row results accumulate into the global y in that
//! order, so the combination order is fixed.

use super::{check_dims, warp_reduce, ExecStats, HardwareProfile, Scalar};
use crate::error::{Error, Result};
use crate::matrix::ELL_PAD;
use crate::transform::{
    permute_x, HybRemainder, PackedTile, RemainderPart, StorageOrder, TiledCompositeMatrix,
    TiledCooMatrix,
};

/// Observes every x-position a kernel gathers. The no-op impl compiles
/// away, so the timing path pays nothing for the instrumentation.
trait Probe {
    fn touch(&mut self, col: usize);
}

struct NoProbe;

impl Probe for NoProbe {
    #[inline(always)]
    fn touch(&mut self, _col: usize) {}
}

/// Bitmap of distinct positions over one tile's column span.
struct SpanProbe {
    start: usize,
    seen: Vec<bool>,
}

impl SpanProbe {
    fn new(start: usize, end: usize) -> Self {
        SpanProbe {
            start,
            seen: vec![false; end - start],
        }
    }

    fn distinct(&self) -> usize {
        self.seen.iter().filter(|&&t| t).count()
    }
}

impl Probe for SpanProbe {
    #[inline(always)]
    fn touch(&mut self, col: usize) {
        self.seen[col - self.start] = true;
    }
}

pub fn spmv_tile_composite(
    m: &TiledCompositeMatrix,
    x: &[f64],
    hw: &HardwareProfile,
) -> Result<(Vec<f64>, ExecStats)> {
    tile_composite_impl::<f64>(m, x, hw)
}

pub(crate) fn tile_composite_impl<S: Scalar>(
    m: &TiledCompositeMatrix,
    x: &[f64],
    hw: &HardwareProfile,
) -> Result<(Vec<f64>, ExecStats)> {
    check_dims(m.num_cols, x)?;
    hw.validate()?;
    m.validate()?;
    if hw.warp_size != m.warp_size {
        return Err(Error::InvalidArgument(format!(
            "matrix packed for warp size {}, hardware has {}",
            m.warp_size, hw.warp_size
        )));
    }
    let xs: Vec<S> = permute_x(&m.col_perm, x)
        .iter()
        .map(|&v| S::from_f64(v))
        .collect();
    let mut y = vec![0.0f64; m.num_rows];
    let mut stats = ExecStats::default();
    run_composite_parts::<S>(m, &xs, hw, &mut y, &mut stats);
    Ok((y, stats))
}

/// Executes every packed part against an x already in the sorted
/// column domain, recording full statistics. No validation and no
/// permutation — the public entry above owns those.
pub(crate) fn run_composite_parts<S: Scalar>(
    m: &TiledCompositeMatrix,
    xs: &[S],
    hw: &HardwareProfile,
    y: &mut [f64],
    stats: &mut ExecStats,
) {
    for tile in &m.tiles {
        let mut probe = SpanProbe::new(tile.start_col, tile.end_col);
        exec_packed_tile::<S, _>(tile, xs, hw, y, stats, &mut probe);
        stats.x_fetches_per_tile.push(probe.distinct());
        stats.kernel_launches += 1;
    }
    match &m.remainder {
        Some(RemainderPart::Composite(tile)) => {
            let mut probe = SpanProbe::new(tile.start_col, tile.end_col);
            exec_packed_tile::<S, _>(tile, xs, hw, y, stats, &mut probe);
            stats.x_fetches_remainder = probe.distinct();
            stats.kernel_launches += 1;
        }
        Some(RemainderPart::Hyb(rem)) => {
            let mut probe = SpanProbe::new(rem.start_col, rem.hyb.num_cols());
            hyb_accumulate::<S, _>(rem, xs, hw, y, stats, &mut probe);
            stats.x_fetches_remainder = probe.distinct();
            stats.kernel_launches += 1;
        }
        None => {}
    }
}

/// Benchmark entry: the same slot loops as [`spmv_tile_composite`]
/// with no fetch tracking, so repeated calls time the arithmetic
/// alone. Adds into `y` without zeroing it first; `xs` must already be
/// permuted into packed column order (see
/// [`permute_x`](crate::transform::permute_x)) and the `scratch`
/// counters are meaningless across repeats. No argument validation —
/// wrong lengths panic on an out-of-bounds index.
pub fn run_composite_untracked(
    m: &TiledCompositeMatrix,
    xs: &[f64],
    hw: &HardwareProfile,
    y: &mut [f64],
    scratch: &mut ExecStats,
) {
    run_composite_timed::<f64>(m, xs, hw, y, scratch)
}

/// The benchmark timing path: identical slot loops, no fetch tracking.
/// The caller supplies a reusable stats scratch; its counters are
/// meaningless across repeated calls and simply ignored.
pub(crate) fn run_composite_timed<S: Scalar>(
    m: &TiledCompositeMatrix,
    xs: &[S],
    hw: &HardwareProfile,
    y: &mut [f64],
    stats: &mut ExecStats,
) {
    for tile in &m.tiles {
        exec_packed_tile::<S, _>(tile, xs, hw, y, stats, &mut NoProbe);
    }
    match &m.remainder {
        Some(RemainderPart::Composite(tile)) => {
            exec_packed_tile::<S, _>(tile, xs, hw, y, stats, &mut NoProbe);
        }
        Some(RemainderPart::Hyb(rem)) => {
            hyb_accumulate::<S, _>(rem, xs, hw, y, stats, &mut NoProbe);
        }
        None => {}
    }
}

/// Executes one packed tile, adding row results into `y`.
fn exec_packed_tile<S: Scalar, P: Probe>(
    tile: &PackedTile,
    xs: &[S],
    hw: &HardwareProfile,
    y: &mut [f64],
    stats: &mut ExecStats,
    probe: &mut P,
) {
    let mut lanes = vec![S::ZERO; hw.warp_size];
    for wl in &tile.workloads {
        stats.work_units += 1;
        stats.flops += 2 * wl.nnz as u64;
        stats.padded_slots += (wl.slots() - wl.nnz) as u64;
        match wl.order {
            StorageOrder::RowMajor => {
                // CSR-vector style: the warp walks one stored row at a
                // time, lanes striding across its w slots.
                for local in 0..wl.h {
                    lanes.iter_mut().for_each(|l| *l = S::ZERO);
                    let base = wl.offset + local * wl.w;
                    for k in 0..wl.w {
                        let c = tile.col_idx[base + k];
                        probe.touch(c);
                        let lane = k % hw.warp_size;
                        lanes[lane] = lanes[lane].mul_add_to(tile.values[base + k], xs[c]);
                    }
                    let row = wl.row_ids[local];
                    y[row] = S::from_f64(y[row]).add(warp_reduce(&mut lanes)).to_f64();
                }
            }
            StorageOrder::ColumnMajor => {
                // ELL style: one lane per stored row, slots walked in
                // column-major order. Rows beyond height0 are pure
                // padding and produce no result.
                for local in 0..wl.h {
                    let mut acc = S::ZERO;
                    for k in 0..wl.w {
                        let slot = wl.offset + k * wl.h + local;
                        let c = tile.col_idx[slot];
                        probe.touch(c);
                        acc = acc.mul_add_to(tile.values[slot], xs[c]);
                    }
                    if local < wl.height0() {
                        let row = wl.row_ids[local];
                        y[row] = S::from_f64(y[row]).add(acc).to_f64();
                    }
                }
            }
        }
    }
}

/// Executes a HYB-form sparse remainder, adding into `y`.
fn hyb_accumulate<S: Scalar, P: Probe>(
    rem: &HybRemainder,
    xs: &[S],
    hw: &HardwareProfile,
    y: &mut [f64],
    stats: &mut ExecStats,
    probe: &mut P,
) {
    let hyb = &rem.hyb;
    let ell = &hyb.ell;
    for (i, out) in y.iter_mut().enumerate().take(ell.num_rows) {
        let mut acc = S::ZERO;
        for j in 0..ell.width {
            let slot = j * ell.num_rows + i;
            let c = ell.col_idx[slot];
            if c == ELL_PAD {
                stats.padded_slots += 1;
            } else {
                probe.touch(c);
                acc = acc.mul_add_to(ell.values[slot], xs[c]);
            }
        }
        *out = S::from_f64(*out).add(acc).to_f64();
    }
    stats.work_units += (ell.num_rows as u64).div_ceil(hw.warp_size as u64);
    for &(_, c, _) in &hyb.coo.entries {
        probe.touch(c);
    }
    stats.work_units += super::kernels::coo_impl::<S>(&hyb.coo.entries, xs, hw, y);
    stats.flops += 2 * hyb.nnz() as u64;
}

pub fn spmv_tile_coo(
    m: &TiledCooMatrix,
    x: &[f64],
    hw: &HardwareProfile,
) -> Result<(Vec<f64>, ExecStats)> {
    tile_coo_impl::<f64>(m, x, hw)
}

pub(crate) fn tile_coo_impl<S: Scalar>(
    m: &TiledCooMatrix,
    x: &[f64],
    hw: &HardwareProfile,
) -> Result<(Vec<f64>, ExecStats)> {
    check_dims(m.num_cols, x)?;
    hw.validate()?;
    let xs: Vec<S> = permute_x(&m.col_perm, x)
        .iter()
        .map(|&v| S::from_f64(v))
        .collect();
    let mut y = vec![0.0f64; m.num_rows];
    let mut stats = ExecStats::default();
    for tile in &m.tiles {
        let mut probe = SpanProbe::new(tile.start_col, tile.end_col);
        for &(_, c, _) in &tile.entries {
            probe.touch(c);
        }
        stats.work_units += super::kernels::coo_impl::<S>(&tile.entries, &xs, hw, &mut y);
        stats.flops += 2 * tile.entries.len() as u64;
        stats.kernel_launches += 1;
        stats.x_fetches_per_tile.push(probe.distinct());
    }
    if let Some(rem) = &m.remainder {
        let mut probe = SpanProbe::new(rem.start_col, rem.hyb.num_cols());
        hyb_accumulate::<S, _>(rem, &xs, hw, &mut y, &mut stats, &mut probe);
        stats.x_fetches_remainder = probe.distinct();
        stats.kernel_launches += 1;
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{dense_spmv_oracle, generate_power_law, CsrMatrix};
    use crate::transform::{
        build_tile_coo, build_tile_composite, enumerate_tiles, sort_columns_desc, RemainderMode,
        WorkloadSizes,
    };

    fn hw(warp: usize) -> HardwareProfile {
        HardwareProfile {
            warp_size: warp,
            ..HardwareProfile::default()
        }
    }

    /// Budgets that always satisfy the longest-row precondition.
    fn feasible_sizes(m: &CsrMatrix, tile_width: usize, slack: usize) -> WorkloadSizes {
        let sorted = sort_columns_desc(m);
        let layout = enumerate_tiles(&sorted, tile_width).unwrap();
        let (tiles, rem) = crate::transform::extract_tiles(&sorted, &layout);
        WorkloadSizes {
            per_tile: tiles.iter().map(|t| t.longest_row() + slack).collect(),
            remainder: rem.map_or(1, |t| t.longest_row() + slack),
        }
    }

    #[test]
    fn identity_times_x_is_x() {
        let m = CsrMatrix::identity(4);
        // every column has one entry, so everything lands in the
        // remainder and there are no dense tiles
        for mode in [RemainderMode::Composite, RemainderMode::Hyb] {
            let built =
                build_tile_composite(&m, 2, &WorkloadSizes::uniform(0, 4), 2, mode).unwrap();
            assert!(built.tiles.is_empty());
            let (y, stats) = spmv_tile_composite(&built, &[1.0, 2.0, 3.0, 4.0], &hw(2)).unwrap();
            assert_eq!(y, vec![1.0, 2.0, 3.0, 4.0]);
            assert_eq!(stats.kernel_launches, 1);
            assert_eq!(stats.flops, 8);
        }
    }

    #[test]
    fn walkthrough_matrix_executes_exactly() {
        let m = crate::transform::walkthrough_matrix();
        let built = build_tile_composite(
            &m,
            2,
            &WorkloadSizes::uniform(2, 4),
            2,
            RemainderMode::Composite,
        )
        .unwrap();
        let x: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let (y, stats) = spmv_tile_composite(&built, &x, &hw(2)).unwrap();
        // integer-valued data: sums are exact in f64
        assert_eq!(y, dense_spmv_oracle(&m, &x).unwrap());
        assert_eq!(stats.kernel_launches, 3); // 2 tiles + remainder
        assert_eq!(stats.flops, 2 * m.nnz() as u64);
        assert_eq!(stats.x_fetches_per_tile.len(), 2);
        for &fetches in &stats.x_fetches_per_tile {
            assert!(fetches <= 2);
        }
    }

    #[test]
    fn tiled_kernels_match_the_oracle_on_power_law_graphs() {
        for seed in [2u64, 14] {
            let m = generate_power_law(800, 2.1, 9000, seed).unwrap().to_csr();
            let x: Vec<f64> = (0..800).map(|i| ((i * 13 % 41) as f64) * 0.25 - 3.0).collect();
            let oracle = dense_spmv_oracle(&m, &x).unwrap();

            let sizes = feasible_sizes(&m, 32, 20);
            for mode in [RemainderMode::Composite, RemainderMode::Hyb] {
                let built = build_tile_composite(&m, 32, &sizes, 4, mode).unwrap();
                let (y, _) = spmv_tile_composite(&built, &x, &hw(4)).unwrap();
                for (i, (got, want)) in y.iter().zip(&oracle).enumerate() {
                    assert!(
                        (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                        "composite {mode:?} row {i}"
                    );
                }
            }

            let tiled = build_tile_coo(&m, 32).unwrap();
            let (y, stats) = spmv_tile_coo(&tiled, &x, &hw(4)).unwrap();
            for (got, want) in y.iter().zip(&oracle) {
                assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
            }
            assert_eq!(stats.kernel_launches as usize, tiled.tiles.len() + 1);
        }
    }

    #[test]
    fn locality_no_tile_gathers_more_than_tile_width() {
        let m = generate_power_law(600, 2.0, 7000, 8).unwrap().to_csr();
        let tile_width = 16;
        let sizes = feasible_sizes(&m, tile_width, 10);
        let built =
            build_tile_composite(&m, tile_width, &sizes, 4, RemainderMode::Composite).unwrap();
        let x = vec![1.0; 600];
        let (_, stats) = spmv_tile_composite(&built, &x, &hw(4)).unwrap();
        assert!(!stats.x_fetches_per_tile.is_empty());
        for (t, &fetches) in stats.x_fetches_per_tile.iter().enumerate() {
            assert!(fetches <= tile_width, "tile {t} gathered {fetches}");
        }
    }

    #[test]
    fn timed_path_computes_the_same_product() {
        let m = generate_power_law(400, 2.1, 5000, 21).unwrap().to_csr();
        let x: Vec<f64> = (0..400).map(|i| (i as f64 * 0.37).sin() + 1.5).collect();
        let sizes = feasible_sizes(&m, 32, 12);
        let built = build_tile_composite(&m, 32, &sizes, 4, RemainderMode::Hyb).unwrap();
        let (y_probed, _) = spmv_tile_composite(&built, &x, &hw(4)).unwrap();

        let xs = permute_x(&built.col_perm, &x);
        let mut y = vec![0.0f64; 400];
        let mut scratch = ExecStats::default();
        run_composite_timed::<f64>(&built, &xs, &hw(4), &mut y, &mut scratch);
        assert_eq!(y, y_probed);
        assert!(scratch.x_fetches_per_tile.is_empty());
    }

    #[test]
    fn padded_slots_are_counted() {
        // single row of 5 entries, warp 4 -> w pads to 8, 3 padded slots
        let m = crate::matrix::CooMatrix::new(
            2,
            6,
            vec![
                (0, 0, 1.0),
                (0, 1, 1.0),
                (0, 2, 1.0),
                (0, 3, 1.0),
                (0, 4, 1.0),
                (1, 5, 1.0),
            ],
        )
        .unwrap()
        .to_csr();
        // every column is a singleton -> no dense tile; the remainder
        // packs rows [5, 1]: workload (8x1) + workload (4x1), row-major
        let built = build_tile_composite(
            &m,
            4,
            &WorkloadSizes {
                per_tile: vec![],
                remainder: 5,
            },
            4,
            RemainderMode::Composite,
        )
        .unwrap();
        let (_, stats) = spmv_tile_composite(&built, &[1.0; 6], &hw(4)).unwrap();
        assert_eq!(stats.padded_slots, (8 - 5) + (4 - 1));
        assert_eq!(stats.work_units, 2);
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let m = generate_power_law(300, 2.2, 4000, 77).unwrap().to_csr();
        let x: Vec<f64> = (0..300).map(|i| (i as f64).cos() * 2.0).collect();
        let sizes = feasible_sizes(&m, 16, 8);
        let built = build_tile_composite(&m, 16, &sizes, 8, RemainderMode::Composite).unwrap();
        let (y1, s1) = spmv_tile_composite(&built, &x, &hw(8)).unwrap();
        let (y2, s2) = spmv_tile_composite(&built, &x, &hw(8)).unwrap();
        assert_eq!(y1, y2);
        assert_eq!(s1, s2);
        let bits1: Vec<u64> = y1.iter().map(|v| v.to_bits()).collect();
        let bits2: Vec<u64> = y2.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits1, bits2);
    }

    #[test]
    fn warp_size_mismatch_is_rejected() {
        let m = CsrMatrix::identity(4);
        let built = build_tile_composite(
            &m,
            2,
            &WorkloadSizes::uniform(0, 4),
            2,
            RemainderMode::Composite,
        )
        .unwrap();
        assert!(spmv_tile_composite(&built, &[0.0; 4], &hw(4)).is_err());
    }

    #[test]
    fn corrupt_layout_is_rejected_at_execution() {
        let m = crate::transform::walkthrough_matrix();
        let mut built = build_tile_composite(
            &m,
            2,
            &WorkloadSizes::uniform(2, 4),
            2,
            RemainderMode::Composite,
        )
        .unwrap();
        built.tiles[0].workloads[1].offset = 0; // overlaps workload 0
        match spmv_tile_composite(&built, &[0.0; 8], &hw(2)) {
            Err(Error::Integrity(_)) => {}
            other => panic!("expected integrity error, got {other:?}"),
        }
    }
}
