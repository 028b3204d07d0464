//! Baseline kernels: CSR scalar, CSR vector, COO, ELL, HYB.
//!
//! Each public function is the 64-bit entry point; the generic `*_impl`
//! bodies also serve the single-precision mode through
//! [`super::PreparedMatrix`].

use super::{check_dims, warp_reduce, HardwareProfile, Scalar};
use crate::error::Result;
use crate::matrix::{CooMatrix, CsrMatrix, EllMatrix, HybMatrix, ELL_PAD};

pub(crate) fn narrow<S: Scalar>(x: &[f64]) -> Vec<S> {
    x.iter().map(|&v| S::from_f64(v)).collect()
}

/// One thread per row, entries accumulated left to right.
pub fn spmv_csr_scalar(m: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_dims(m.num_cols, x)?;
    Ok(csr_scalar_impl::<f64>(m, &narrow(x)))
}

pub(crate) fn csr_scalar_impl<S: Scalar>(m: &CsrMatrix, x: &[S]) -> Vec<f64> {
    let mut y = vec![0.0f64; m.num_rows];
    for (i, out) in y.iter_mut().enumerate() {
        let (cols, vals) = m.row(i);
        let mut acc = S::ZERO;
        for (&c, &v) in cols.iter().zip(vals) {
            acc = acc.mul_add_to(v, x[c]);
        }
        *out = acc.to_f64();
    }
    y
}

/// One warp per row: lane `l` takes entries `l, l + warp, ...`, then
/// the lanes reduce as a binary tree.
pub fn spmv_csr_vector(m: &CsrMatrix, x: &[f64], hw: &HardwareProfile) -> Result<Vec<f64>> {
    check_dims(m.num_cols, x)?;
    hw.validate()?;
    Ok(csr_vector_impl::<f64>(m, &narrow(x), hw))
}

pub(crate) fn csr_vector_impl<S: Scalar>(m: &CsrMatrix, x: &[S], hw: &HardwareProfile) -> Vec<f64> {
    let ws = hw.warp_size;
    let mut y = vec![0.0f64; m.num_rows];
    let mut lanes = vec![S::ZERO; ws];
    for (i, out) in y.iter_mut().enumerate() {
        lanes.iter_mut().for_each(|l| *l = S::ZERO);
        let (cols, vals) = m.row(i);
        for (j, (&c, &v)) in cols.iter().zip(vals).enumerate() {
            let lane = j % ws;
            lanes[lane] = lanes[lane].mul_add_to(v, x[c]);
        }
        *out = warp_reduce(&mut lanes).to_f64();
    }
    y
}

/// One lane per row, slots walked in storage order; padding slots are
/// skipped by their sentinel.
pub fn spmv_ell(m: &EllMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_dims(m.num_cols, x)?;
    Ok(ell_impl::<f64>(m, &narrow(x)))
}

pub(crate) fn ell_impl<S: Scalar>(m: &EllMatrix, x: &[S]) -> Vec<f64> {
    let mut y = vec![0.0f64; m.num_rows];
    for (i, out) in y.iter_mut().enumerate() {
        let mut acc = S::ZERO;
        for j in 0..m.width {
            let slot = j * m.num_rows + i;
            let c = m.col_idx[slot];
            if c != ELL_PAD {
                acc = acc.mul_add_to(m.values[slot], x[c]);
            }
        }
        *out = acc.to_f64();
    }
    y
}

/// Entries split into equal-length intervals, one per active work
/// unit; inside an interval a warp computes warp-size products at a
/// time and combines them with a segmented tree scan that respects row
/// boundaries, so partial rows carry across strides and intervals
/// correctly.
pub fn spmv_coo(m: &CooMatrix, x: &[f64], hw: &HardwareProfile) -> Result<Vec<f64>> {
    check_dims(m.num_cols, x)?;
    hw.validate()?;
    let mut y = vec![0.0f64; m.num_rows];
    coo_impl::<f64>(&m.entries, &narrow(x), hw, &mut y);
    Ok(y)
}

/// Runs the COO kernel over row-sorted `entries`, accumulating into
/// `y`. Returns the number of work units (intervals) used.
pub(crate) fn coo_impl<S: Scalar>(
    entries: &[(usize, usize, f64)],
    x: &[S],
    hw: &HardwareProfile,
    y: &mut [f64],
) -> u64 {
    debug_assert!(entries.windows(2).all(|w| w[0].0 <= w[1].0));
    let nnz = entries.len();
    if nnz == 0 {
        return 0;
    }
    let interval = nnz.div_ceil(hw.max_active_total()).max(1);
    let ws = hw.warp_size;
    let mut units = 0u64;
    let mut products = vec![S::ZERO; ws];
    let mut scanned = vec![S::ZERO; ws];
    for interval_start in (0..nnz).step_by(interval) {
        units += 1;
        let interval_end = (interval_start + interval).min(nnz);
        for stride_start in (interval_start..interval_end).step_by(ws) {
            let stride = &entries[stride_start..(stride_start + ws).min(interval_end)];
            for (k, &(_, c, v)) in stride.iter().enumerate() {
                products[k] = S::ZERO.mul_add_to(v, x[c]);
            }
            // segmented inclusive scan: a lane absorbs its left
            // neighbour at doubling offsets while both sit in the same
            // row's run
            let n = stride.len();
            let mut offset = 1;
            while offset < n {
                scanned[..n].copy_from_slice(&products[..n]);
                for k in offset..n {
                    if stride[k].0 == stride[k - offset].0 {
                        products[k] = scanned[k].add(scanned[k - offset]);
                    }
                }
                offset *= 2;
            }
            // the last lane of each run owns the run's sum
            for k in 0..n {
                if k + 1 == n || stride[k].0 != stride[k + 1].0 {
                    let row = stride[k].0;
                    y[row] = S::from_f64(y[row]).add(products[k]).to_f64();
                }
            }
        }
    }
    units
}

/// ELL part first, COO overflow added on top.
pub fn spmv_hyb(m: &HybMatrix, x: &[f64], hw: &HardwareProfile) -> Result<Vec<f64>> {
    check_dims(m.num_cols(), x)?;
    hw.validate()?;
    let xs = narrow::<f64>(x);
    let mut y = ell_impl::<f64>(&m.ell, &xs);
    coo_impl::<f64>(&m.coo.entries, &xs, hw, &mut y);
    Ok(y)
}

pub(crate) fn hyb_impl<S: Scalar>(m: &HybMatrix, x: &[S], hw: &HardwareProfile) -> (Vec<f64>, u64) {
    let mut y = ell_impl::<S>(&m.ell, x);
    let ell_units = (m.ell.num_rows as u64).div_ceil(hw.warp_size as u64);
    let coo_units = coo_impl::<S>(&m.coo.entries, x, hw, &mut y);
    (y, ell_units + coo_units)
}
