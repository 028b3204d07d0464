//! Model-driven selection of the two layout parameters: how many
//! dense tiles to carve, and the workload size of each.
//!
//! The tile count comes from the column-length break rule (stop at the
//! first tile whose leading column has one entry or fewer); the
//! workload sizes come from minimizing [`predict_time`] over a small
//! candidate set per tile. Dense tiles read x from a narrow resident
//! window, so they are priced with a cached table; the remainder
//! gathers across the whole vector and gets the uncached one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::HardwareProfile;
use crate::matrix::CsrMatrix;
use crate::perfmodel::{predict_time, PerfTable};
use crate::transform::{
    build_tile_composite, enumerate_tiles, extract_tiles, sort_columns_desc, sort_rows_desc,
    ColumnSortedMatrix, RemainderMode, Tile, TiledCompositeMatrix, WorkloadSizes,
};

const FORMAT_NAME: &str = "tuning-plan";
const FORMAT_VERSION: u32 = 1;

/// One tile's tuning result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunedTile {
    pub workload_size: usize,
    /// Model time at that size, in seconds under the table's rates.
    pub predicted_time: f64,
}

/// Picks the workload size of one tile. Candidates are the multiples
/// of the tile's longest row length `L` — `L, 2L, 3L, …` — capped by
/// the occupancy bound `nnz / max_active_total` and by the table's
/// upper bound. An empty candidate set (tiny tile, cap below `L`)
/// falls back to `L` alone: the lower bound is a hard feasibility
/// constraint, the upper bound only a heuristic. Ties break toward
/// the smaller size, which pads less memory.
pub fn tune_workload(tile: &Tile, table: &PerfTable, hw: &HardwareProfile) -> Result<TunedTile> {
    hw.validate()?;
    check_warp(table, hw)?;
    let wl_low = tile.longest_row();
    if tile.rows.is_empty() || wl_low == 0 {
        return Err(Error::InvalidArgument("cannot tune an empty tile".into()));
    }
    let wl_up = tile.nnz() / hw.max_active_total();
    let cap = wl_up.min(table.upper_bound());
    let mut candidates: Vec<usize> = (1..)
        .map(|k| wl_low * k)
        .take_while(|&wl| wl <= cap)
        .collect();
    if candidates.is_empty() {
        candidates.push(wl_low);
    }
    let mut best: Option<TunedTile> = None;
    for wl in candidates {
        let cost = predict_time(tile, wl, table, hw)?;
        if best.is_none_or(|b| cost.total_time < b.predicted_time) {
            best = Some(TunedTile {
                workload_size: wl,
                predicted_time: cost.total_time,
            });
        }
    }
    Ok(best.expect("candidate set is never empty"))
}

fn check_warp(table: &PerfTable, hw: &HardwareProfile) -> Result<()> {
    if table.warp_size() != hw.warp_size {
        return Err(Error::FingerprintMismatch {
            table: format!("warp size {}", table.warp_size()),
            hardware: format!("warp size {}", hw.warp_size),
        });
    }
    Ok(())
}

/// The tuned layout parameters for one matrix: tile width, one
/// workload size per dense tile, and one for the sparse remainder
/// when it holds any entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningPlan {
    /// Fingerprint of the hardware the tables were measured on.
    pub fingerprint: String,
    pub tile_width: usize,
    pub tiles: Vec<TunedTile>,
    pub remainder: Option<TunedTile>,
}

impl TuningPlan {
    pub fn num_tiles(&self) -> usize {
        self.tiles.len()
    }

    /// Model time of the whole plan: tiles plus remainder.
    pub fn total_predicted_time(&self) -> f64 {
        self.tiles.iter().map(|t| t.predicted_time).sum::<f64>()
            + self.remainder.map_or(0.0, |r| r.predicted_time)
    }

    /// The budgets in the form the layout builder consumes. A missing
    /// remainder gets a placeholder budget of 1; the builder never
    /// packs rows into a remainder that has none.
    pub fn workload_sizes(&self) -> WorkloadSizes {
        WorkloadSizes {
            per_tile: self.tiles.iter().map(|t| t.workload_size).collect(),
            remainder: self.remainder.map_or(1, |r| r.workload_size),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TuningPlanFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            fingerprint: self.fingerprint.clone(),
            tile_width: self.tile_width,
            num_tiles: self.tiles.len(),
            tiles: self.tiles.clone(),
            remainder: self.remainder,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TuningPlanFile = serde_json::from_str(text)?;
        if file.format != FORMAT_NAME || file.version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "expected {FORMAT_NAME} v{FORMAT_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        if file.num_tiles != file.tiles.len() {
            return Err(Error::InvalidArgument(format!(
                "plan claims {} tiles but lists {}",
                file.num_tiles,
                file.tiles.len()
            )));
        }
        if file.tile_width == 0 {
            return Err(Error::InvalidArgument("plan tile_width is zero".into()));
        }
        for (i, t) in file.tiles.iter().chain(file.remainder.iter()).enumerate() {
            if t.workload_size == 0 || !t.predicted_time.is_finite() || t.predicted_time < 0.0 {
                return Err(Error::InvalidArgument(format!("plan entry {i} is malformed")));
            }
        }
        Ok(TuningPlan {
            fingerprint: file.fingerprint,
            tile_width: file.tile_width,
            tiles: file.tiles,
            remainder: file.remainder,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TuningPlanFile {
    format: String,
    version: u32,
    fingerprint: String,
    tile_width: usize,
    num_tiles: usize,
    tiles: Vec<TunedTile>,
    remainder: Option<TunedTile>,
}

/// Tunes a whole matrix: carve tiles until the break rule fires, tune
/// each with the cached table, and tune the remainder — whose gathers
/// wander the full vector width — with the uncached one.
pub fn choose_tiles(
    sorted: &ColumnSortedMatrix,
    tile_width: usize,
    cached: &PerfTable,
    uncached: &PerfTable,
    hw: &HardwareProfile,
) -> Result<TuningPlan> {
    hw.validate()?;
    check_warp(cached, hw)?;
    check_warp(uncached, hw)?;
    let layout = enumerate_tiles(sorted, tile_width)?;
    let (tiles, remainder) = extract_tiles(sorted, &layout);
    let mut tuned = Vec::with_capacity(tiles.len());
    for tile in tiles {
        let tile = sort_rows_desc(tile);
        tuned.push(tune_workload(&tile, cached, hw)?);
    }
    let remainder = match remainder {
        Some(t) if !t.rows.is_empty() => {
            let t = sort_rows_desc(t);
            Some(tune_workload(&t, uncached, hw)?)
        }
        _ => None,
    };
    Ok(TuningPlan {
        fingerprint: hw.fingerprint(),
        tile_width,
        tiles: tuned,
        remainder,
    })
}

/// Tune and build in one step. The plan's workload sizes are each at
/// least their tile's longest row, so the build cannot hit the
/// row-cannot-be-split error.
pub fn tuned_build(
    m: &CsrMatrix,
    tile_width: usize,
    cached: &PerfTable,
    uncached: &PerfTable,
    hw: &HardwareProfile,
) -> Result<(TiledCompositeMatrix, TuningPlan)> {
    let sorted = sort_columns_desc(m);
    let plan = choose_tiles(&sorted, tile_width, cached, uncached, hw)?;
    let built = build_tile_composite(
        m,
        tile_width,
        &plan.workload_sizes(),
        hw.warp_size,
        RemainderMode::Composite,
    )?;
    Ok((built, plan))
}
