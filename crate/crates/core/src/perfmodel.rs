//! The offline benchmark table and the online runtime predictor.
//!
//! A [`PerfTable`] maps a stored workload shape `(w, h)` to the
//! aggregate rate, in slot-updates per second, that the execution
//! engine sustains while chewing through a long stream of workloads of
//! exactly that shape. One slot-update is one multiply-add on one
//! stored slot (padding included), so a flop rate is simply twice the
//! table value. Tables come in three flavors:
//!
//! * measured — [`build_perf_table`] times the real engine on this
//!   host; values vary run to run, the construction does not;
//! * synthetic — [`PerfTable::synthetic`] evaluates the closed form
//!   [`synthetic_throughput`], bit-reproducible everywhere;
//! * uniform — [`PerfTable::uniform`] holds one constant, which makes
//!   predicted time collapse to the padded slot count. Handy for
//!   sanity checks.
//!
//! [`predict_time`] walks a tile's row lengths the way the packer
//! would, looks each resulting shape up in the table, and combines the
//! per-warp rates into per-iteration times: warps beyond the number
//! the hardware can keep active queue into later iterations, each
//! iteration costs its padded size divided by the mean rate of its
//! warps, and the total is the sum. The walk differs from the greedy
//! packer in one deliberate way — it assumes every group holds exactly
//! `workload_size / w` rows — and the resulting gap between analytic
//! and actual padded slots is reported per prediction rather than
//! hidden.
//!
//! [`plan_cost`] prices a whole tiling plan (compute + launches +
//! x-vector traffic) in slot-times; it is the objective the tile-count
//! search minimizes.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{ExecStats, HardwareProfile};
use crate::transform::{
    ColumnSortedMatrix, PackedTile, StorageOrder, Tile, TiledCompositeMatrix, Workload,
    CAMPING_PAD_SLOTS, CAMPING_STRIDE_SLOTS,
};

/// Default cap on workload sizes, and hence on stored shapes (`w·h`
/// never meaningfully exceeds the workload size it was cut from).
pub const DEFAULT_UPPER_BOUND: usize = 32768;

/// Asymptotic rate of the synthetic model, in slot-updates/sec.
pub const SYNTHETIC_BASE_RATE: f64 = 1.0e9;
/// Workload area at which the synthetic model reaches half its
/// asymptotic rate: small workloads are issue-bound.
pub const SYNTHETIC_HALF_SATURATION: f64 = 1024.0;
/// Rate penalty for gathers that miss the cache.
pub const SYNTHETIC_UNCACHED_FACTOR: f64 = 0.5;

/// Fixed cost of one kernel launch, in slot-times.
pub const LAUNCH_COST_SLOTS: f64 = 64.0;
/// Cost of hauling one x position from memory, in slot-times.
pub const FETCH_COST_SLOTS: f64 = 256.0;

/// Column span used by uncached benchmark runs; wide enough that the
/// gathered x positions cannot stay resident in a typical host cache.
const SCATTER_SPAN: usize = 1 << 19;

const FORMAT_NAME: &str = "perf-table";
const FORMAT_VERSION: u32 = 1;

fn round_up(x: usize, multiple: usize) -> usize {
    x.div_ceil(multiple) * multiple
}

/// Whether the benchmark workloads gather x from a cache-resident
/// window (dense tiles) or from scattered positions (the remainder).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableMode {
    Cached,
    Uncached,
}

/// The closed form behind synthetic tables:
/// `rate(w, h) = B · w·h / (w·h + K)`, halved for uncached mode, with
/// `B` = [`SYNTHETIC_BASE_RATE`] and `K` = [`SYNTHETIC_HALF_SATURATION`].
/// Small workloads pay fixed issue overhead; large ones saturate.
pub fn synthetic_throughput(w: usize, h: usize, mode: TableMode) -> f64 {
    let area = (w * h) as f64;
    let scale = match mode {
        TableMode::Cached => 1.0,
        TableMode::Uncached => SYNTHETIC_UNCACHED_FACTOR,
    };
    scale * SYNTHETIC_BASE_RATE * area / (area + SYNTHETIC_HALF_SATURATION)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfTable {
    fingerprint: String,
    mode: TableMode,
    upper_bound: usize,
    warp_size: usize,
    /// Unix seconds when a measured table was built; None for
    /// synthetic and uniform tables so their files are reproducible.
    built_unix: Option<u64>,
    entries: BTreeMap<(usize, usize), f64>,
}

/// Stored shapes that a workload of size ≤ `bound` can actually pad
/// to: row-major shapes have `w` a warp multiple and `w ≥ h`,
/// column-major shapes have `h` a warp multiple and `h > w`, and in
/// both cases some unpadded witness `(w0, h0)` with `w0·h0 ≤ bound`
/// rounds to the shape.
fn reachable_cells(warp: usize, bound: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    let mut w = warp;
    while w <= round_up(bound, warp) {
        let w0_min = (w + 1 - warp).max(1);
        for h in 1..=w {
            let w0 = w0_min.max(h);
            if w0 * h > bound {
                break;
            }
            cells.push((w, h));
        }
        w += warp;
    }
    let mut h = warp;
    while h <= round_up(bound, warp) {
        let h0_min = (h + 1 - warp).max(1);
        for w in 1..h {
            let h0 = h0_min.max(w + 1);
            if w * h0 > bound {
                break;
            }
            cells.push((w, h));
        }
        h += warp;
    }
    cells
}

/// Every `(w, h)` with `w·h ≤ bound` where either dimension is a warp
/// multiple. Superset of what the predictor can ever ask for; the
/// synthetic table covers it because enumerating a closed form is
/// free.
fn multiple_rule_cells(warp: usize, bound: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for w in 1..=bound {
        let h_max = bound / w;
        if h_max == 0 {
            break;
        }
        if w % warp == 0 {
            cells.extend((1..=h_max).map(|h| (w, h)));
        } else {
            cells.extend((warp..=h_max).step_by(warp).map(|h| (w, h)));
        }
    }
    cells
}

impl PerfTable {
    fn check_build_args(hw: &HardwareProfile, upper_bound: usize) -> Result<()> {
        hw.validate()?;
        if upper_bound < hw.warp_size {
            return Err(Error::InvalidArgument(format!(
                "table upper bound {} is below the warp size {}",
                upper_bound, hw.warp_size
            )));
        }
        Ok(())
    }

    /// Bit-reproducible table from the documented closed form,
    /// covering every multiple-rule shape up to the bound plus the
    /// padded shapes reachable from workloads within the bound.
    pub fn synthetic(hw: &HardwareProfile, upper_bound: usize, mode: TableMode) -> Result<Self> {
        Self::check_build_args(hw, upper_bound)?;
        let mut entries = BTreeMap::new();
        for (w, h) in multiple_rule_cells(hw.warp_size, upper_bound) {
            entries.insert((w, h), synthetic_throughput(w, h, mode));
        }
        for (w, h) in reachable_cells(hw.warp_size, upper_bound) {
            entries.insert((w, h), synthetic_throughput(w, h, mode));
        }
        Ok(PerfTable {
            fingerprint: hw.fingerprint(),
            mode,
            upper_bound,
            warp_size: hw.warp_size,
            built_unix: None,
            entries,
        })
    }

    /// A table holding one constant rate over the same domain as the
    /// synthetic table. With rate 1, predicted time equals padded
    /// slots.
    pub fn uniform(hw: &HardwareProfile, upper_bound: usize, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "uniform table rate must be positive and finite, got {rate}"
            )));
        }
        let mut table = Self::synthetic(hw, upper_bound, TableMode::Cached)?;
        for v in table.entries.values_mut() {
            *v = rate;
        }
        Ok(table)
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    pub fn upper_bound(&self) -> usize {
        self.upper_bound
    }

    pub fn warp_size(&self) -> usize {
        self.warp_size
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn built_unix(&self) -> Option<u64> {
        self.built_unix
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Shapes a workload may legally take under this table's bound:
    /// area within bound and at least one warp-multiple dimension.
    pub fn admissible(&self, w: usize, h: usize) -> bool {
        w >= 1
            && h >= 1
            && w * h <= self.upper_bound
            && (w.is_multiple_of(self.warp_size) || h.is_multiple_of(self.warp_size))
    }

    pub fn lookup(&self, w: usize, h: usize) -> Result<f64> {
        self.entries
            .get(&(w, h))
            .copied()
            .ok_or(Error::TableHole { w, h })
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(w, h), &p)| (w, h, p))
    }

    pub fn check_fingerprint(&self, hw: &HardwareProfile) -> Result<()> {
        let expected = hw.fingerprint();
        if self.fingerprint != expected {
            return Err(Error::FingerprintMismatch {
                table: self.fingerprint.clone(),
                hardware: expected,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = PerfTableFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            fingerprint: self.fingerprint.clone(),
            mode: self.mode,
            upper_bound: self.upper_bound,
            warp_size: self.warp_size,
            built_unix: self.built_unix,
            entries: self.entries().collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PerfTableFile = serde_json::from_str(text)?;
        if file.format != FORMAT_NAME || file.version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "expected {FORMAT_NAME} v{FORMAT_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        if file.warp_size == 0 || file.upper_bound < file.warp_size {
            return Err(Error::Unsupported(format!(
                "bad table metadata: warp {} upper bound {}",
                file.warp_size, file.upper_bound
            )));
        }
        let mut entries = BTreeMap::new();
        for (i, &(w, h, p)) in file.entries.iter().enumerate() {
            let mult_ok = w >= 1
                && h >= 1
                && (w % file.warp_size == 0 || h % file.warp_size == 0);
            if !mult_ok || !p.is_finite() || p <= 0.0 {
                return Err(Error::TableInvalid(i));
            }
            if entries.insert((w, h), p).is_some() {
                return Err(Error::TableInvalid(i));
            }
        }
        Ok(PerfTable {
            fingerprint: file.fingerprint,
            mode: file.mode,
            upper_bound: file.upper_bound,
            warp_size: file.warp_size,
            built_unix: file.built_unix,
            entries,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PerfTableFile {
    format: String,
    version: u32,
    fingerprint: String,
    mode: TableMode,
    upper_bound: usize,
    warp_size: usize,
    built_unix: Option<u64>,
    entries: Vec<(usize, usize, f64)>,
}

/// Timing knobs for measured tables.
#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    /// Samples per cell; the recorded rate is their median.
    pub reps: usize,
    /// Each sample repeats the kernel until this much wall time has
    /// elapsed, so tiny shapes still time whole milliseconds.
    pub min_sample: Duration,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            reps: 3,
            min_sample: Duration::from_millis(2),
        }
    }
}

/// Times the execution engine on this host over every reachable shape
/// up to `upper_bound` and records the sustained slot rate per shape.
/// Construction of the timing inputs is deterministic; the recorded
/// rates are whatever the host delivers.
pub fn build_perf_table(
    hw: &HardwareProfile,
    upper_bound: usize,
    mode: TableMode,
) -> Result<PerfTable> {
    build_perf_table_with(hw, upper_bound, mode, &BenchOptions::default())
}

pub fn build_perf_table_with(
    hw: &HardwareProfile,
    upper_bound: usize,
    mode: TableMode,
    opts: &BenchOptions,
) -> Result<PerfTable> {
    PerfTable::check_build_args(hw, upper_bound)?;
    if opts.reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let mut entries = BTreeMap::new();
    for (w, h) in reachable_cells(hw.warp_size, upper_bound) {
        entries.insert((w, h), bench_cell(w, h, hw, mode, opts));
    }
    let built_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    Ok(PerfTable {
        fingerprint: hw.fingerprint(),
        mode,
        upper_bound,
        warp_size: hw.warp_size,
        built_unix,
        entries,
    })
}

/// A stream of identical `(w, h)` workloads, one per active warp, all
/// slots real. Cached mode keeps every gather inside a `w`-wide
/// window; uncached strides gathers across [`SCATTER_SPAN`] with a
/// per-row phase so consecutive rows never share a window.
fn bench_matrix(
    w: usize,
    h: usize,
    warps: usize,
    hw: &HardwareProfile,
    mode: TableMode,
) -> TiledCompositeMatrix {
    let order = if w >= h {
        StorageOrder::RowMajor
    } else {
        StorageOrder::ColumnMajor
    };
    let num_cols = match mode {
        TableMode::Cached => w,
        TableMode::Uncached => SCATTER_SPAN.max(w),
    };
    let stride = num_cols / w;
    let slots = w * h;
    let camping = if slots.is_multiple_of(CAMPING_STRIDE_SLOTS) {
        CAMPING_PAD_SLOTS
    } else {
        0
    };
    let mut values = Vec::with_capacity(warps * (slots + camping));
    let mut col_idx = Vec::with_capacity(warps * (slots + camping));
    let mut workloads = Vec::with_capacity(warps);
    let mut offset = 0usize;
    for k in 0..warps {
        for slot in 0..slots {
            let (local, e) = match order {
                StorageOrder::RowMajor => (slot / w, slot % w),
                StorageOrder::ColumnMajor => (slot % h, slot / h),
            };
            let row = k * h + local;
            let phase = row.wrapping_mul(2654435761) % stride;
            col_idx.push(phase + e * stride);
            values.push(1.0);
        }
        col_idx.extend(std::iter::repeat_n(0, camping));
        values.extend(std::iter::repeat_n(0.0, camping));
        workloads.push(Workload {
            row_start: k * h,
            row_ids: (k * h..(k + 1) * h).collect(),
            row_lens: vec![w; h],
            nnz: slots,
            w,
            h,
            order,
            offset,
            camping_pad: camping,
        });
        offset += slots + camping;
    }
    let tile = PackedTile {
        tile_id: 0,
        start_col: 0,
        end_col: num_cols,
        nnz: warps * slots,
        workloads,
        values,
        col_idx,
    };
    let (tiles, remainder) = match mode {
        TableMode::Cached => (vec![tile], None),
        TableMode::Uncached => (
            Vec::new(),
            Some(crate::transform::RemainderPart::Composite(tile)),
        ),
    };
    let m = TiledCompositeMatrix {
        num_rows: warps * h,
        num_cols,
        tile_width: num_cols,
        warp_size: hw.warp_size,
        total_nnz: warps * slots,
        col_perm: (0..num_cols).collect(),
        tiles,
        remainder,
    };
    debug_assert!(m.validate().is_ok());
    m
}

fn bench_cell(w: usize, h: usize, hw: &HardwareProfile, mode: TableMode, opts: &BenchOptions) -> f64 {
    let warps = hw.max_active_total();
    let m = bench_matrix(w, h, warps, hw, mode);
    let xs: Vec<f64> = (0..m.num_cols).map(|c| 1.0 + (c % 7) as f64 * 0.125).collect();
    let mut y = vec![0.0f64; m.num_rows];
    let mut scratch = ExecStats::default();
    // warm caches and the branch predictor before the first sample
    crate::exec::run_composite_timed::<f64>(&m, &xs, hw, &mut y, &mut scratch);
    let mut samples = Vec::with_capacity(opts.reps);
    for _ in 0..opts.reps {
        let start = Instant::now();
        let mut calls = 0u64;
        loop {
            crate::exec::run_composite_timed::<f64>(&m, &xs, hw, &mut y, &mut scratch);
            calls += 1;
            if start.elapsed() >= opts.min_sample {
                break;
            }
        }
        let secs = start.elapsed().as_secs_f64();
        std::hint::black_box(&y);
        samples.push(calls as f64 * (warps * w * h) as f64 / secs);
    }
    samples.sort_by(|a, b| a.total_cmp(b));
    samples[samples.len() / 2]
}

/// The modeled cost of one tile at one workload size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedCost {
    pub workload_size: usize,
    /// Analytic warp count: nnz divided by workload size, rounded up.
    pub warps: usize,
    /// Analytic iteration count: warps over the hardware's active
    /// capacity, rounded up. The walk below can finish in fewer
    /// iterations when padding advances it faster.
    pub iterations: usize,
    /// Padded slots per iteration actually produced by the walk.
    pub per_iter_size: Vec<u64>,
    /// Unweighted mean rate of each iteration's warps.
    pub per_iter_throughput: Vec<f64>,
    pub per_iter_time: Vec<f64>,
    pub total_time: f64,
    /// Padded slots the analytic walk assumes.
    pub model_padded_slots: u64,
    /// Padded slots the greedy packer actually produces.
    pub layout_padded_slots: u64,
}

impl PredictedCost {
    /// Relative gap between the analytic partition and the greedy
    /// layout, in padded slots.
    pub fn layout_divergence(&self) -> f64 {
        let model = self.model_padded_slots as f64;
        let layout = self.layout_padded_slots as f64;
        (model - layout).abs() / layout.max(1.0)
    }
}

/// Predicts the run time of one tile at the given workload size by
/// walking its sorted row lengths: each warp takes the current row
/// length as its width, `workload_size / width` rows as its height,
/// pads the wider dimension to a warp multiple, and the walk advances
/// by the padded height. Warps queue into iterations of
/// `max_active_total`; each iteration costs its padded size divided by
/// its mean warp rate.
pub fn predict_time(
    tile: &Tile,
    workload_size: usize,
    table: &PerfTable,
    hw: &HardwareProfile,
) -> Result<PredictedCost> {
    hw.validate()?;
    if tile.rows.is_empty() {
        return Err(Error::InvalidArgument("cannot predict an empty tile".into()));
    }
    let mut lengths = tile.row_lengths();
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    predict_from_lengths(&lengths, tile.nnz(), workload_size, table, hw)
}

fn predict_from_lengths(
    lengths: &[usize],
    nnz: usize,
    workload_size: usize,
    table: &PerfTable,
    hw: &HardwareProfile,
) -> Result<PredictedCost> {
    let longest = lengths[0];
    if longest == 0 {
        return Err(Error::InvalidArgument("cannot predict an empty tile".into()));
    }
    if workload_size < longest {
        return Err(Error::WorkloadTooSmall {
            workload_size,
            longest_row: longest,
        });
    }
    let warps = nnz.div_ceil(workload_size);
    let max_active = hw.max_active_total();
    let iterations = warps.div_ceil(max_active);

    let mut size: Vec<u64> = Vec::new();
    let mut rate_sum: Vec<f64> = Vec::new();
    let mut count: Vec<u64> = Vec::new();
    let mut i = 0usize;
    let mut j = 0usize;
    let mut model_padded_slots = 0u64;
    while i < lengths.len() {
        let w0 = lengths[i];
        let h0 = workload_size / w0;
        let (w, h) = pad_shape(w0, h0, hw.warp_size);
        let iter_id = j / max_active;
        if iter_id == size.len() {
            size.push(0);
            rate_sum.push(0.0);
            count.push(0);
        }
        rate_sum[iter_id] += table.lookup(w, h)?;
        size[iter_id] += (w * h) as u64;
        count[iter_id] += 1;
        model_padded_slots += (w * h) as u64;
        j += 1;
        i += h;
    }

    let per_iter_throughput: Vec<f64> = rate_sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    let per_iter_time: Vec<f64> = size
        .iter()
        .zip(&per_iter_throughput)
        .map(|(&s, &p)| s as f64 / p)
        .collect();
    let total_time = per_iter_time.iter().sum();
    let layout_padded_slots = greedy_padded_slots(lengths, workload_size, hw.warp_size)?;
    Ok(PredictedCost {
        workload_size,
        warps,
        iterations,
        per_iter_size: size,
        per_iter_throughput,
        per_iter_time,
        total_time,
        model_padded_slots,
        layout_padded_slots,
    })
}

fn pad_shape(w0: usize, h0: usize, warp: usize) -> (usize, usize) {
    if w0 >= h0 {
        (round_up(w0, warp), h0)
    } else {
        (w0, round_up(h0.max(1), warp))
    }
}

/// Padded slots of the greedy packing, computed from row lengths
/// alone. Mirrors the grouping rule of the real packer so the
/// divergence metric compares like with like.
fn greedy_padded_slots(lengths: &[usize], workload_size: usize, warp: usize) -> Result<u64> {
    let mut slots = 0u64;
    let mut start = 0usize;
    while start < lengths.len() {
        let mut nnz = 0usize;
        let mut end = start;
        while end < lengths.len() && nnz + lengths[end] <= workload_size {
            nnz += lengths[end];
            end += 1;
        }
        if end == start {
            return Err(Error::WorkloadTooSmall {
                workload_size,
                longest_row: lengths[start],
            });
        }
        let (w, h) = pad_shape(lengths[start], end - start, warp);
        slots += (w * h) as u64;
        start = end;
    }
    Ok(slots)
}

/// Cost breakdown of executing a whole plan with `num_tiles` dense
/// tiles, in slot-times at the base rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCost {
    pub num_tiles: usize,
    pub launches: usize,
    /// One slot-time per stored entry, independent of placement.
    pub compute_slots: u64,
    /// Distinct x positions hauled once per dense tile, plus one haul
    /// per remainder entry (no reuse without a resident window).
    pub fetch_positions: u64,
    pub total_slot_times: f64,
}

/// Prices a plan: compute is placement-neutral, every launch costs
/// [`LAUNCH_COST_SLOTS`], every fetched x position costs
/// [`FETCH_COST_SLOTS`]. A dense tile fetches each populated column in
/// its span once; remainder entries fetch individually. Growing the
/// plan by one tile therefore pays one launch and saves
/// `FETCH_COST_SLOTS · Σ (column length − 1)` over that tile's span —
/// worthwhile exactly when some column in the span has two or more
/// entries.
pub fn plan_cost(
    sorted: &ColumnSortedMatrix,
    tile_width: usize,
    num_tiles: usize,
) -> Result<PlanCost> {
    if tile_width == 0 {
        return Err(Error::InvalidArgument("tile_width must be at least 1".into()));
    }
    let n = sorted.col_lengths.len();
    let max_tiles = n.div_ceil(tile_width);
    if num_tiles > max_tiles {
        return Err(Error::InvalidArgument(format!(
            "{num_tiles} tiles of width {tile_width} exceed {n} columns"
        )));
    }
    let dense_cols = (num_tiles * tile_width).min(n);
    let mut fetch_positions = 0u64;
    let mut total_nnz = 0u64;
    for (c, &len) in sorted.col_lengths.iter().enumerate() {
        total_nnz += len as u64;
        if c < dense_cols {
            fetch_positions += (len > 0) as u64;
        } else {
            fetch_positions += len as u64;
        }
    }
    let remainder_nnz: u64 = sorted.col_lengths[dense_cols..]
        .iter()
        .map(|&l| l as u64)
        .sum();
    let launches = num_tiles + (remainder_nnz > 0) as usize;
    let total_slot_times = total_nnz as f64
        + LAUNCH_COST_SLOTS * launches as f64
        + FETCH_COST_SLOTS * fetch_positions as f64;
    Ok(PlanCost {
        num_tiles,
        launches,
        compute_slots: total_nnz,
        fetch_positions,
        total_slot_times,
    })
}
