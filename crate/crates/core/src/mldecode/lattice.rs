use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{real_vec, ComplexMatrix};

/// Smallest singular value accepted by [`qr_factor`].
pub const RANK_TOL: f64 = 1e-10;

/// Real generator matrix `B` of the received lattice together with its thin QR
/// factors (`R` upper triangular with non-negative diagonal).
#[derive(Debug, Clone)]
pub struct RealizedLattice {
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl RealizedLattice {
    /// Vectorize `H·B_i` for every basis matrix and factor the result.
    pub fn from_channel(h: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<Self> {
        qr_factor(vectorize_real(h, basis)?)
    }

    pub fn k(&self) -> usize {
        self.b.ncols()
    }

    /// `Qᵀ y`.
    pub fn rotate(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.q.column(j).iter().zip(y).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Column `i` is `[Re vec(H·B_i); Im vec(H·B_i)]`, with `vec` stacking columns.
pub fn vectorize_real(h: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<DMatrix<f64>> {
    let Some(first) = basis.first() else {
        return Err(Error::Dimension("empty basis".into()));
    };
    let n = first.nrows();
    if h.ncols() != n {
        return Err(Error::Dimension(format!("channel has {} columns, codewords have {n} rows", h.ncols())));
    }
    let m = 2 * h.nrows() * first.ncols();
    let mut b = DMatrix::zeros(m, basis.len());
    for (j, bj) in basis.iter().enumerate() {
        if bj.shape() != first.shape() {
            return Err(Error::Dimension(format!("basis matrix {j} has shape {:?}", bj.shape())));
        }
        let v = real_vec(&(h * bj));
        b.column_mut(j).copy_from_slice(&v);
    }
    Ok(b)
}

/// Thin QR with `diag(R) ≥ 0`; rank-deficient input is a degenerate channel.
pub fn qr_factor(b: DMatrix<f64>) -> Result<RealizedLattice> {
    let (m, k) = b.shape();
    if k == 0 || m < k {
        return Err(Error::DegenerateChannel(format!("{m}x{k} generator cannot have full column rank")));
    }
    let sv = b.clone().svd(false, false).singular_values;
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > RANK_TOL) {
        return Err(Error::DegenerateChannel(format!("smallest singular value {smin:e}")));
    }
    let qr = b.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..k {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    Ok(RealizedLattice { b, q, r })
}
