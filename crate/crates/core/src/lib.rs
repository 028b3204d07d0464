//! Sparse matrix-vector multiplication kernels organized around a
//! cache-aware *tile-composite* storage scheme, plus the machinery that
//! grows around it in practice:
//!
//! * [`matrix`] — COO/CSR/ELL/HYB formats, Matrix Market I/O, a seeded
//!   power-law matrix generator, and the dense reference oracle.
//! * [`transform`] — column sorting, fixed-width column tiling, per-tile
//!   row sorting, greedy workload packing into row-major/column-major
//!   composite storage, and the padded flat layout.
//! * [`exec`] — an emulated warp-based execution core with baseline
//!   kernels (CSR scalar/vector, COO, ELL, HYB) and the tiled kernels,
//!   all with deterministic reduction orders and access statistics.
//! * [`perfmodel`] — offline per-shape throughput tables (measured on the
//!   emulator or synthetic/analytic) and the workload-walk time predictor.
//! * [`autotune`] — per-tile workload-size selection and tile-count
//!   selection driven by the performance model.
//! * [`mining`] — PageRank, HITS and random walk with restart running on
//!   any SpMV backend.
//! * [`distrib`] — multi-partition SpMV simulation with serpentine row
//!   partitioning, communication accounting, and an optional socket mode.
//!
//! Everything is deterministic: fixed reduction trees, seeded RNG, and
//! canonical orderings throughout, so repeated runs produce bit-identical
//! results.

pub mod autotune;
pub mod distrib;
pub mod error;
pub mod exec;
pub mod matrix;
pub mod mining;
pub mod perfmodel;
pub mod transform;

pub use error::{Error, Result};
