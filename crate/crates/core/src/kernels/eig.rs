//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use crate::error::{OpError, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::tolerance::ToleranceConfig;

const MAX_SWEEPS: usize = 80;

/// Hermitian eigendecomposition: ascending real eigenvalues and unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    /// V diag(f(lambda)) V*.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * f(self.values[j]));
        &scaled * &self.vectors.adjoint()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Largest tolerated asymmetry before a matrix is rejected as non-Hermitian.
fn hermitian_gate(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(OpError::ShapeMismatch(format!("eigensolver needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(OpError::Invalid("non-finite entries".into()));
    }
    let asym = a.hermitian_asymmetry();
    if asym > 1e-12 * a.max_abs() {
        return Err(OpError::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

pub fn hermitian_eig(a: &ComplexMatrix, _tol: &ToleranceConfig) -> Result<EigDecomposition> {
    hermitian_gate(a)?;
    let (values, vectors) = jacobi(a.hermitian_part(), true)?;
    Ok(EigDecomposition { values, vectors: vectors.expect("vectors requested") })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigvals(a: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_gate(a)?;
    Ok(jacobi(a.hermitian_part(), false)?.0)
}

/// Unitary `G` acting on the (p, q) plane that annihilates `a_pq`.
fn rotation(app: f64, aqq: f64, apq: C64) -> [C64; 4] {
    let g = apq.norm();
    let phase = apq / g;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        let s = if tau >= 0.0 { 1.0 } else { -1.0 };
        s / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ph = phase.conj();
    [C64::new(c, 0.0), C64::new(s, 0.0), -ph * s, ph * c]
}

fn jacobi(mut a: ComplexMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    let n = a.rows();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let norm_f = a.frobenius_norm();
    if n <= 1 || norm_f == 0.0 {
        return Ok(finish(a, v));
    }
    let target = f64::EPSILON * norm_f;
    let skip = target / (4.0 * n as f64);
    let mut sweeps = 0;
    loop {
        let mut off2 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off2 += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off2).sqrt() <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(OpError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= skip {
                    continue;
                }
                let g = rotation(a[(p, p)].re, a[(q, q)].re, apq);
                for k in 0..n {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    a[(k, p)] = x * g[0] + y * g[2];
                    a[(k, q)] = x * g[1] + y * g[3];
                }
                for k in 0..n {
                    let x = a[(p, k)];
                    let y = a[(q, k)];
                    a[(p, k)] = g[0].conj() * x + g[2].conj() * y;
                    a[(q, k)] = g[1].conj() * x + g[3].conj() * y;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let x = v[(k, p)];
                        let y = v[(k, q)];
                        v[(k, p)] = x * g[0] + y * g[2];
                        v[(k, q)] = x * g[1] + y * g[3];
                    }
                }
            }
        }
    }
    Ok(finish(a, v))
}

fn finish(a: ComplexMatrix, v: Option<ComplexMatrix>) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|v| ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]));
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &ComplexMatrix, e: &EigDecomposition) -> f64 {
        let mut worst = 0.0f64;
        for (i, &l) in e.values.iter().enumerate() {
            let v = e.vector(i);
            let av = a.mat_vec(&v);
            let r: f64 = av.iter().zip(&v).map(|(x, y)| (x - y * l).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r);
        }
        worst
    }

    #[test]
    fn diagonal_sorted() {
        let a = ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0]);
        let e = hermitian_eig(&a, &ToleranceConfig::default()).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn swap_matrix() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = hermitian_eig(&a, &ToleranceConfig::default()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn characteristic_polynomial_oracle() {
        // lambda^2 - 4 lambda + 3 = (lambda - 1)(lambda - 3)
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = hermitian_eig(&a, &ToleranceConfig::default()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!(residual(&a, &e) < 1e-14);
    }

    #[test]
    fn complex_hermitian_residual() {
        let a = ComplexMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else if i < j {
                C64::new(0.3 * (i + j) as f64, 0.7 - j as f64 * 0.1)
            } else {
                C64::new(0.3 * (i + j) as f64, -(0.7 - i as f64 * 0.1))
            }
        });
        let e = hermitian_eig(&a, &ToleranceConfig::default()).unwrap();
        assert!(residual(&a, &e) < 1e-12);
        let vv = &e.vectors.adjoint() * &e.vectors;
        assert!((&vv - &ComplexMatrix::identity(5)).max_abs() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&a, &ToleranceConfig::default()), Err(OpError::NotHermitian { .. })));
    }
}
