//! Backend selection: one name per kernel/representation pair, plus a
//! prepared-matrix wrapper so callers can pick a backend at runtime
//! (CLI flag, config file) and drive any of them through one spmv
//! entry point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::kernels::{coo_impl, csr_scalar_impl, csr_vector_impl, ell_impl, hyb_impl, narrow};
use super::tiled::{tile_composite_impl, tile_coo_impl};
use super::{check_dims, ExecStats, HardwareProfile, Precision, Scalar};
use crate::error::{Error, Result};
use crate::matrix::{CooMatrix, CsrMatrix, EllMatrix, HybMatrix};
use crate::transform::{
    build_tile_composite, build_tile_coo, enumerate_tiles, extract_tiles, sort_columns_desc,
    RemainderMode, TiledCompositeMatrix, TiledCooMatrix, WorkloadSizes, DEFAULT_TILE_WIDTH,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    CsrScalar,
    CsrVector,
    Coo,
    Ell,
    Hyb,
    TileCoo,
    TileComposite,
}

impl Backend {
    pub const ALL: [Backend; 7] = [
        Backend::CsrScalar,
        Backend::CsrVector,
        Backend::Coo,
        Backend::Ell,
        Backend::Hyb,
        Backend::TileCoo,
        Backend::TileComposite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::CsrScalar => "csr-scalar",
            Backend::CsrVector => "csr-vector",
            Backend::Coo => "coo",
            Backend::Ell => "ell",
            Backend::Hyb => "hyb",
            Backend::TileCoo => "tile-coo",
            Backend::TileComposite => "tile-composite",
        }
    }

    /// Converts a CSR matrix into this backend's representation with
    /// untuned defaults: full-width ELL, the one-third HYB split, the
    /// default tile width, and workload sizes just large enough to
    /// keep every warp slot busy (see [`default_workload_sizes`]).
    pub fn prepare(self, m: &CsrMatrix, hw: &HardwareProfile) -> Result<PreparedMatrix> {
        hw.validate()?;
        Ok(match self {
            Backend::CsrScalar => PreparedMatrix::CsrScalar(m.clone()),
            Backend::CsrVector => PreparedMatrix::CsrVector(m.clone()),
            Backend::Coo => PreparedMatrix::Coo(m.to_coo()),
            Backend::Ell => PreparedMatrix::Ell(EllMatrix::from_csr(m, m.max_row_len())?),
            Backend::Hyb => {
                PreparedMatrix::Hyb(HybMatrix::from_csr(m, HybMatrix::default_split_width(m))?)
            }
            Backend::TileCoo => PreparedMatrix::TileCoo(build_tile_coo(m, DEFAULT_TILE_WIDTH)?),
            Backend::TileComposite => {
                let sizes = default_workload_sizes(m, DEFAULT_TILE_WIDTH, hw)?;
                PreparedMatrix::TileComposite(build_tile_composite(
                    m,
                    DEFAULT_TILE_WIDTH,
                    &sizes,
                    hw.warp_size,
                    RemainderMode::Hyb,
                )?)
            }
        })
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Backend::ALL.iter().map(|b| b.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown backend {s:?}, expected one of: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Workload sizes that give every tile at least one slot per active
/// warp while staying feasible for its longest row. This is the
/// untuned default; the tuner searches upward from the same floor.
pub fn default_workload_sizes(
    m: &CsrMatrix,
    tile_width: usize,
    hw: &HardwareProfile,
) -> Result<WorkloadSizes> {
    hw.validate()?;
    let sorted = sort_columns_desc(m);
    let layout = enumerate_tiles(&sorted, tile_width)?;
    let (tiles, remainder) = extract_tiles(&sorted, &layout);
    let pick = |nnz: usize, longest: usize| (nnz / hw.max_active_total()).max(longest).max(1);
    Ok(WorkloadSizes {
        per_tile: tiles.iter().map(|t| pick(t.nnz(), t.longest_row())).collect(),
        remainder: remainder.map_or(1, |t| pick(t.nnz(), t.longest_row())),
    })
}

/// A matrix already converted for one backend. Baseline kernels report
/// no execution statistics; the tiled kernels do.
#[derive(Debug, Clone)]
pub enum PreparedMatrix {
    CsrScalar(CsrMatrix),
    CsrVector(CsrMatrix),
    Coo(CooMatrix),
    Ell(EllMatrix),
    Hyb(HybMatrix),
    TileCoo(TiledCooMatrix),
    TileComposite(TiledCompositeMatrix),
}

impl PreparedMatrix {
    pub fn backend(&self) -> Backend {
        match self {
            PreparedMatrix::CsrScalar(_) => Backend::CsrScalar,
            PreparedMatrix::CsrVector(_) => Backend::CsrVector,
            PreparedMatrix::Coo(_) => Backend::Coo,
            PreparedMatrix::Ell(_) => Backend::Ell,
            PreparedMatrix::Hyb(_) => Backend::Hyb,
            PreparedMatrix::TileCoo(_) => Backend::TileCoo,
            PreparedMatrix::TileComposite(_) => Backend::TileComposite,
        }
    }

    pub fn num_rows(&self) -> usize {
        match self {
            PreparedMatrix::CsrScalar(m) | PreparedMatrix::CsrVector(m) => m.num_rows,
            PreparedMatrix::Coo(m) => m.num_rows,
            PreparedMatrix::Ell(m) => m.num_rows,
            PreparedMatrix::Hyb(m) => m.ell.num_rows,
            PreparedMatrix::TileCoo(m) => m.num_rows,
            PreparedMatrix::TileComposite(m) => m.num_rows,
        }
    }

    pub fn num_cols(&self) -> usize {
        match self {
            PreparedMatrix::CsrScalar(m) | PreparedMatrix::CsrVector(m) => m.num_cols,
            PreparedMatrix::Coo(m) => m.num_cols,
            PreparedMatrix::Ell(m) => m.num_cols,
            PreparedMatrix::Hyb(m) => m.num_cols(),
            PreparedMatrix::TileCoo(m) => m.num_cols,
            PreparedMatrix::TileComposite(m) => m.num_cols,
        }
    }

    pub fn spmv(&self, x: &[f64], hw: &HardwareProfile) -> Result<(Vec<f64>, Option<ExecStats>)> {
        self.spmv_prec(x, hw, Precision::Double)
    }

    pub fn spmv_prec(
        &self,
        x: &[f64],
        hw: &HardwareProfile,
        precision: Precision,
    ) -> Result<(Vec<f64>, Option<ExecStats>)> {
        match precision {
            Precision::Double => self.run::<f64>(x, hw),
            Precision::Single => self.run::<f32>(x, hw),
        }
    }

    fn run<S: Scalar>(
        &self,
        x: &[f64],
        hw: &HardwareProfile,
    ) -> Result<(Vec<f64>, Option<ExecStats>)> {
        hw.validate()?;
        check_dims(self.num_cols(), x)?;
        Ok(match self {
            PreparedMatrix::CsrScalar(m) => (csr_scalar_impl::<S>(m, &narrow(x)), None),
            PreparedMatrix::CsrVector(m) => (csr_vector_impl::<S>(m, &narrow(x), hw), None),
            PreparedMatrix::Coo(m) => {
                let mut y = vec![0.0f64; m.num_rows];
                coo_impl::<S>(&m.entries, &narrow(x), hw, &mut y);
                (y, None)
            }
            PreparedMatrix::Ell(m) => (ell_impl::<S>(m, &narrow(x)), None),
            PreparedMatrix::Hyb(m) => (hyb_impl::<S>(m, &narrow(x), hw).0, None),
            PreparedMatrix::TileCoo(m) => {
                let (y, stats) = tile_coo_impl::<S>(m, x, hw)?;
                (y, Some(stats))
            }
            PreparedMatrix::TileComposite(m) => {
                let (y, stats) = tile_composite_impl::<S>(m, x, hw)?;
                (y, Some(stats))
            }
        })
    }
}
