//! Finite sections with boundary bookkeeping.
//!
//! For a band-`b` operator the columns of `T P_n` live in the first `n + b`
//! coordinates, so rendering at `n + b` gives `P_n T*T P_n` exactly. Products of
//! sections agree with the infinite operator only away from the boundary; the
//! interior is the first `n - margin` coordinates, `margin = factor * b`.

use crate::error::{OpError, Result};
use crate::kernels::hermitian_norm;
use crate::matrix::ComplexMatrix;
use crate::operator::{render, StructuredOperator};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone)]
pub struct Section {
    pub n: usize,
    pub bandwidth: usize,
    /// Dimension of the underlying space when finite.
    pub dimension: Option<usize>,
    /// `P_n T P_n`.
    pub t: ComplexMatrix,
    /// `T P_n` as an `(n + b) x n` matrix.
    pub columns: ComplexMatrix,
    /// `P_n T` as an `n x (n + b)` matrix.
    pub rows: ComplexMatrix,
}

impl Section {
    pub fn new(op: &StructuredOperator, n: usize) -> Result<Self> {
        let b = op.bandwidth();
        let big = render(op, n + b)?;
        let t = big.leading(n);
        let all_rows: Vec<usize> = (0..n + b).collect();
        let first: Vec<usize> = (0..n).collect();
        let columns = big.select(&all_rows, &first);
        let rows = big.select(&first, &all_rows);
        Ok(Self { n, bandwidth: b, dimension: op.dimension(), t, columns, rows })
    }

    /// `P_n T* T P_n`, exact.
    pub fn gram(&self) -> ComplexMatrix {
        (&self.columns.adjoint() * &self.columns).hermitian_part()
    }

    /// `P_n T T* P_n`, exact.
    pub fn cogram(&self) -> ComplexMatrix {
        (&self.rows * &self.rows.adjoint()).hermitian_part()
    }

    pub fn interior(&self, tol: &ToleranceConfig) -> Result<usize> {
        match self.dimension {
            Some(d) if self.n >= d => Ok(self.n),
            _ => interior_size(self.n, self.bandwidth, tol),
        }
    }
}

/// Number of interior coordinates, or `InteriorEmpty`.
pub fn interior_size(n: usize, bandwidth: usize, tol: &ToleranceConfig) -> Result<usize> {
    let margin = tol.margin(bandwidth);
    if n <= margin {
        return Err(OpError::InteriorEmpty { n, margin });
    }
    Ok(n - margin)
}

/// Interior of the `n`-section of `op`. A section covering a finite-dimensional
/// space has no truncation boundary.
pub fn op_interior(op: &StructuredOperator, n: usize, tol: &ToleranceConfig) -> Result<usize> {
    match op.dimension() {
        Some(d) if n >= d => Ok(n),
        _ => interior_size(n, op.bandwidth(), tol),
    }
}

/// Leading `keep x keep` block of `Q_r X Q_c*` (ambient coordinates).
pub fn ambient_interior(q_rows: &ComplexMatrix, x: &ComplexMatrix, q_cols: &ComplexMatrix, keep: usize) -> ComplexMatrix {
    let r = q_rows.top_left(keep.min(q_rows.rows()), q_rows.cols());
    let c = q_cols.top_left(keep.min(q_cols.rows()), q_cols.cols());
    &(&r * x) * &c.adjoint()
}

/// Spectral norm of a Hermitian interior block (zero for empty blocks).
pub fn interior_hermitian_norm(h: &ComplexMatrix, keep: usize) -> Result<f64> {
    hermitian_norm(&h.leading(keep.min(h.rows())).hermitian_part())
}
