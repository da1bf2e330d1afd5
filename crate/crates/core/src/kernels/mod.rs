//! Dense numerical kernels: Hermitian eigendecomposition, SVD, PSD tests,
//! norms, square roots and the polar decomposition.

mod eig;
mod polar;
mod svd;

pub use eig::{hermitian_eig, hermitian_eigvals, EigDecomposition};
pub use polar::{polar_decompose, PolarForm};
pub use svd::{complete_orthonormal, svd, Svd};

use crate::error::{OpError, Result};
use crate::matrix::ComplexMatrix;
use crate::tolerance::ToleranceConfig;

/// `A* A`, symmetrised.
pub fn gram(a: &ComplexMatrix) -> ComplexMatrix {
    (&a.adjoint() * a).hermitian_part()
}

/// `A A*`, symmetrised.
pub fn cogram(a: &ComplexMatrix) -> ComplexMatrix {
    (a * &a.adjoint()).hermitian_part()
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.rows() == 0 || a.is_zero() {
        return Ok(0.0);
    }
    let v = hermitian_eigvals(a)?;
    Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())))
}

/// Spectral norm (largest singular value) of any matrix.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 || a.is_zero() {
        return Ok(0.0);
    }
    if a.is_square() && a.hermitian_asymmetry() == 0.0 {
        return hermitian_norm(a);
    }
    let g = if a.rows() >= a.cols() { gram(a) } else { cogram(a) };
    Ok(hermitian_norm(&g)?.sqrt())
}

/// Smallest singular value; 0 for an empty matrix.
pub fn min_modulus(a: &ComplexMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    if a.rows() < a.cols() {
        return Ok(0.0);
    }
    let v = hermitian_eigvals(&gram(a))?;
    Ok(v[0].max(0.0).sqrt())
}

/// PSD test: `(holds, min_eigenvalue)`, holds iff min eigenvalue >= -psd_tol * ||A||.
pub fn psd_check(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(bool, f64)> {
    if a.rows() == 0 {
        return Ok((true, 0.0));
    }
    let v = hermitian_eigvals(a)?;
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let min = v[0];
    Ok((min >= -tol.psd_tol * norm, min))
}

/// Positive square root of a PSD matrix.
pub fn sqrt_psd(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let e = hermitian_eig(a, tol)?;
    let norm = e.spectral_radius();
    if let Some(&min) = e.values.first() {
        if min < -tol.psd_tol * norm {
            return Err(OpError::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(e.reconstruct_with(|l| l.max(0.0).sqrt()).hermitian_part())
}

/// Inverse of a Hermitian positive definite matrix through its eigendecomposition.
pub fn inverse_hpd(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let e = hermitian_eig(a, tol)?;
    let norm = e.spectral_radius();
    let min = e.values.first().copied().unwrap_or(0.0);
    if min <= tol.rank_tol * norm {
        return Err(OpError::NotInvertible { min_modulus: min.max(0.0) });
    }
    Ok(e.reconstruct_with(|l| 1.0 / l).hermitian_part())
}

/// Orthonormal basis (columns) of the eigenvectors of Hermitian `a` selected by `keep`.
pub fn eigen_basis(e: &EigDecomposition, keep: impl Fn(f64) -> bool) -> ComplexMatrix {
    let n = e.vectors.rows();
    let cols: Vec<Vec<_>> =
        e.values.iter().enumerate().filter(|(_, &l)| keep(l)).map(|(i, _)| e.vector(i)).collect();
    ComplexMatrix::from_columns(n, &cols)
}

/// Inverse of a general square matrix by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(OpError::ShapeMismatch(format!("inverse of a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let scale = a.max_abs();
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm())).unwrap();
        let p = m[(pivot, col)];
        if p.norm() <= 1e-14 * scale || scale == 0.0 {
            return Err(OpError::NotInvertible { min_modulus: p.norm() });
        }
        if pivot != col {
            for j in 0..n {
                let (x, y) = (m[(col, j)], m[(pivot, j)]);
                m[(col, j)] = y;
                m[(pivot, j)] = x;
                let (x, y) = (inv[(col, j)], inv[(pivot, j)]);
                inv[(col, j)] = y;
                inv[(pivot, j)] = x;
            }
        }
        let r = p.inv();
        for j in 0..n {
            m[(col, j)] *= r;
            inv[(col, j)] *= r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[(i, col)];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let (mc, ic) = (m[(col, j)], inv[(col, j)]);
                m[(i, j)] -= f * mc;
                inv[(i, j)] -= f * ic;
            }
        }
    }
    Ok(inv)
}

/// Orthogonal projector `Q Q*` onto the span of orthonormal columns.
pub fn projector(basis: &ComplexMatrix) -> ComplexMatrix {
    (basis * &basis.adjoint()).hermitian_part()
}
