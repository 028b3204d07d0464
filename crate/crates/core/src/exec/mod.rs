//! Emulated warp-based execution core.
//!
//! Kernels run on an abstract machine described by [`HardwareProfile`]:
//! work is issued in warps of `warp_size` lanes, at most
//! `max_active_total()` work units are considered active at once, and
//! global memory is striped across `partitions` partitions. The
//! emulation is sequential and uses fixed binary-tree reduction orders,
//! so every kernel is bit-for-bit deterministic; the profile only
//! shapes how work is divided and counted.
//!
//! All kernels compute in 64-bit by default. [`Precision::Single`]
//! reruns the same fixed reduction trees in `f32` (inputs narrowed on
//! read, the result vector widened on write), mirroring hardware that
//! is fastest in single precision.

mod backend;
mod kernels;
mod tiled;

pub use backend::{default_workload_sizes, Backend, PreparedMatrix};
pub use kernels::{spmv_coo, spmv_csr_scalar, spmv_csr_vector, spmv_ell, spmv_hyb};
pub use tiled::{run_composite_untracked, spmv_tile_composite, spmv_tile_coo};
pub(crate) use tiled::run_composite_timed;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Shape of the emulated machine. The default matches the hardware the
/// layout constants were chosen for: 30 SMs of 32 resident warps (960
/// active warps total), 32-lane warps, and 8 memory partitions of
/// 256-byte stripes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub warp_size: usize,
    pub num_sm: usize,
    pub max_active_warps_per_sm: usize,
    pub partitions: usize,
    pub partition_width_bytes: usize,
}

impl Default for HardwareProfile {
    fn default() -> Self {
        HardwareProfile {
            warp_size: 32,
            num_sm: 30,
            max_active_warps_per_sm: 32,
            partitions: 8,
            partition_width_bytes: 256,
        }
    }
}

impl HardwareProfile {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.warp_size,
            self.num_sm,
            self.max_active_warps_per_sm,
            self.partitions,
            self.partition_width_bytes,
        ];
        if fields.contains(&0) {
            return Err(Error::InvalidArgument(
                "hardware profile fields must all be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Warps that can be resident at once across the whole device.
    pub fn max_active_total(&self) -> usize {
        self.num_sm * self.max_active_warps_per_sm
    }

    /// Stable identifier used to match performance tables to the
    /// machine they were built for.
    pub fn fingerprint(&self) -> String {
        format!(
            "ws{}-sm{}-aw{}-p{}-pw{}",
            self.warp_size,
            self.num_sm,
            self.max_active_warps_per_sm,
            self.partitions,
            self.partition_width_bytes
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Single,
}

/// Arithmetic carrier for a kernel run. Implementations exist for f64
/// and f32; kernels are generic over this so both precisions share one
/// deterministic code path.
pub(crate) trait Scalar: Copy {
    const ZERO: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn mul_add_to(self, a: f64, x: Self) -> Self;
    fn add(self, other: Self) -> Self;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn mul_add_to(self, a: f64, x: Self) -> Self {
        self + a * x
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
}

impl Scalar for f32 {
    const ZERO: Self = 0.0;
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn mul_add_to(self, a: f64, x: Self) -> Self {
        self + (a as f32) * x
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
}

/// Fixed binary-tree reduction over a warp's lanes. Lane counts that
/// are not powers of two reduce as if padded with zeros, so the order
/// never depends on the data.
pub(crate) fn warp_reduce<S: Scalar>(lanes: &mut [S]) -> S {
    if lanes.is_empty() {
        return S::ZERO;
    }
    let mut offset = lanes.len().next_power_of_two() / 2;
    while offset >= 1 {
        for i in 0..offset {
            if i + offset < lanes.len() {
                lanes[i] = lanes[i].add(lanes[i + offset]);
            }
        }
        offset /= 2;
    }
    lanes[0]
}

/// Counters accumulated by an emulated kernel run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecStats {
    /// One per tile processed (dense tiles plus the remainder); models
    /// the kernel restart between tiles.
    pub kernel_launches: u64,
    /// Warp-sized work units issued.
    pub work_units: u64,
    /// Useful floating point work: two per real matrix entry.
    pub flops: u64,
    /// Padding slots the kernels touched (camping dead space excluded —
    /// nothing ever reads it).
    pub padded_slots: u64,
    /// Distinct x positions gathered per dense tile; each position
    /// counts once no matter how many lanes read it, modeling a fetch
    /// that stays cached for the rest of the tile.
    pub x_fetches_per_tile: Vec<usize>,
    /// Distinct x positions gathered by the sparse remainder. Kept out
    /// of the per-tile list because the remainder spans every leftover
    /// column and runs uncached.
    pub x_fetches_remainder: usize,
}

pub(crate) fn check_dims(num_cols: usize, x: &[f64]) -> Result<()> {
    if x.len() != num_cols {
        return Err(Error::DimensionMismatch {
            expected: num_cols,
            got: x.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_matches_the_layout_constants() {
        let hw = HardwareProfile::default();
        assert_eq!(hw.max_active_total(), 960);
        // camping stride: partitions x stripe / element size
        assert_eq!(
            hw.partitions * hw.partition_width_bytes / 4,
            crate::transform::CAMPING_STRIDE_SLOTS
        );
        assert_eq!(hw.fingerprint(), "ws32-sm30-aw32-p8-pw256");
    }

    #[test]
    fn profile_rejects_zeros() {
        let hw = HardwareProfile {
            num_sm: 0,
            ..HardwareProfile::default()
        };
        assert!(hw.validate().is_err());
    }

    #[test]
    fn warp_reduce_is_a_fixed_tree() {
        // offset 2 pairs a+c and b+d, offset 1 adds the two halves
        let mut lanes = vec![1.0f64, 2.0, 3.0, 4.0];
        assert_eq!(warp_reduce(&mut lanes), (1.0 + 3.0) + (2.0 + 4.0));
        // non-power-of-two width pads with zero
        let mut lanes = vec![1.0f64, 2.0, 3.0];
        assert_eq!(warp_reduce(&mut lanes), (1.0 + 3.0) + 2.0);
        let mut empty: Vec<f64> = vec![];
        assert_eq!(warp_reduce(&mut empty), 0.0);
    }
}
