//! Seeded random matrix generators used by benchmarks and tests.

use super::CooMatrix;
use crate::error::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Generates a square `n x n` adjacency-style matrix whose row and
/// column degree distributions approximately follow `p(d) ∝ d^-alpha`.
///
/// Entries are drawn by sampling row and column independently from a
/// rank-weighted (Zipf) distribution with exponent `1 / (alpha - 1)`,
/// which yields the requested degree-histogram slope; rank-to-index
/// maps are shuffled so the heavy rows/columns land anywhere. Duplicate
/// coordinates are discarded, so very head-heavy settings may fall
/// slightly short of `nnz_target`. All values are 1.0.
///
/// Deterministic in `seed`.
pub fn generate_power_law(n: usize, alpha: f64, nnz_target: usize, seed: u64) -> Result<CooMatrix> {
    if alpha <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "power-law exponent must exceed 1, got {alpha}"
        )));
    }
    if nnz_target > n.saturating_mul(n) {
        return Err(Error::InvalidArgument(format!(
            "cannot place {nnz_target} distinct entries in a {n}x{n} matrix"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n == 0 || nnz_target == 0 {
        return Ok(CooMatrix::empty(n, n));
    }

    let s = 1.0 / (alpha - 1.0);
    // cumulative rank weights, shared by rows and columns
    let mut cdf = Vec::with_capacity(n);
    let mut total = 0.0f64;
    for rank in 1..=n {
        total += (rank as f64).powf(-s);
        cdf.push(total);
    }

    let mut row_of_rank: Vec<usize> = (0..n).collect();
    let mut col_of_rank: Vec<usize> = (0..n).collect();
    row_of_rank.shuffle(&mut rng);
    col_of_rank.shuffle(&mut rng);

    let sample_rank = |rng: &mut ChaCha8Rng| -> usize {
        let t = rng.gen::<f64>() * total;
        cdf.partition_point(|&c| c < t).min(n - 1)
    };

    let mut seen = HashSet::with_capacity(nnz_target * 2);
    let mut entries = Vec::with_capacity(nnz_target);
    let max_attempts = nnz_target.saturating_mul(40).max(1000);
    let mut attempts = 0;
    while entries.len() < nnz_target && attempts < max_attempts {
        attempts += 1;
        let r = row_of_rank[sample_rank(&mut rng)];
        let c = col_of_rank[sample_rank(&mut rng)];
        if seen.insert((r as u64) * n as u64 + c as u64) {
            entries.push((r, c, 1.0));
        }
    }
    CooMatrix::new(n, n, entries)
}

/// Generates a `rows x cols` matrix with `nnz_target` uniformly placed
/// distinct entries and values uniform in [-1, 1). Deterministic in
/// `seed`.
pub fn generate_uniform(rows: usize, cols: usize, nnz_target: usize, seed: u64) -> CooMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    if rows == 0 || cols == 0 {
        return CooMatrix::empty(rows, cols);
    }
    let capacity = rows.saturating_mul(cols);
    let target = nnz_target.min(capacity);
    let mut seen = HashSet::with_capacity(target * 2);
    let mut entries = Vec::with_capacity(target);
    while entries.len() < target {
        let r = rng.gen_range(0..rows);
        let c = rng.gen_range(0..cols);
        if seen.insert((r as u64) * cols as u64 + c as u64) {
            entries.push((r, c, rng.gen_range(-1.0..1.0)));
        }
    }
    CooMatrix::new(rows, cols, entries).expect("generated entries are in range")
}
