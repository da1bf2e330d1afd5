//! Singular value decomposition.
//!
//! The fast route diagonalises `A*A` and recovers the left vectors as
//! `A v / sigma`. When that loses accuracy (small singular values, nearly
//! repeated ones) the result is recomputed with one-sided Jacobi, which
//! orthogonalises the columns of `A` directly.

use crate::error::{OpError, Result};
use crate::matrix::{inner, vec_norm, ComplexMatrix, C64, ZERO};

use super::eig::hermitian_eig;
use super::gram;

const MAX_SWEEPS: usize = 80;

/// `A = U diag(sigma) V*` with `sigma` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let us = ComplexMatrix::from_fn(m, n, |i, j| {
            if j < self.sigma.len() && j < self.u.cols() {
                self.u[(i, j)] * self.sigma[j]
            } else {
                ZERO
            }
        });
        &us * &self.v.adjoint()
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(OpError::Invalid("non-finite entries".into()));
    }
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd { u: t.v, sigma: t.sigma, v: t.u });
    }
    if let Some(fast) = via_gram(a)? {
        return Ok(fast);
    }
    one_sided_jacobi(a)
}

/// Reference accuracy used to accept the `A*A` route.
fn accept(a: &ComplexMatrix, s: &Svd) -> bool {
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let resid = (&(a * &s.v) - &ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| s.u[(i, j)] * s.sigma[j]))
        .frobenius_norm();
    let utu = &s.u.adjoint() * &s.u;
    let orth = (&utu - &ComplexMatrix::identity(s.u.cols())).max_abs();
    resid <= 1e-13 * scale && orth <= 1e-12
}

fn via_gram(a: &ComplexMatrix) -> Result<Option<Svd>> {
    let (m, n) = (a.rows(), a.cols());
    let e = hermitian_eig(&gram(a), &Default::default())?;
    // descending
    let order: Vec<usize> = (0..n).rev().collect();
    let sigma: Vec<f64> = order.iter().map(|&i| e.values[i].max(0.0).sqrt()).collect();
    let v = ComplexMatrix::from_fn(n, n, |i, j| e.vectors[(i, order[j])]);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let floor = smax * 1e-7;
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(m);
    for (j, &s) in sigma.iter().enumerate() {
        if s > floor && s > 0.0 {
            let mut u = a.mat_vec(&v.column(j));
            u.iter_mut().for_each(|x| *x /= s);
            cols.push(u);
        } else if s == 0.0 || smax == 0.0 {
            break;
        } else {
            return Ok(None);
        }
    }
    let cols = complete_orthonormal(cols, m);
    let out = Svd { u: ComplexMatrix::from_columns(m, &cols), sigma, v };
    Ok(accept(a, &out).then_some(out))
}

fn one_sided_jacobi(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v = ComplexMatrix::identity(n);
    // columns below this squared norm are roundoff; rotating them never settles
    let negligible = (f64::EPSILON * a.frobenius_norm()).powi(2);
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = w[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = w[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma = inner(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau.abs() > 1e150 {
                    0.5 / tau
                } else {
                    let s = if tau >= 0.0 { 1.0 } else { -1.0 };
                    s / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ph = phase.conj();
                let g = [C64::new(c, 0.0), C64::new(s, 0.0), -ph * s, ph * c];
                for k in 0..m {
                    let x = w[p][k];
                    let y = w[q][k];
                    w[p][k] = x * g[0] + y * g[2];
                    w[q][k] = x * g[1] + y * g[3];
                }
                for k in 0..n {
                    let x = v[(k, p)];
                    let y = v[(k, q)];
                    v[(k, p)] = x * g[0] + y * g[2];
                    v[(k, q)] = x * g[1] + y * g[3];
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            return Err(OpError::NoConvergence { sweeps });
        }
    }
    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let v = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let mut cols = Vec::new();
    for (j, &i) in order.iter().enumerate() {
        if sigma[j] > smax * f64::EPSILON * n as f64 && sigma[j] > 0.0 {
            cols.push(w[i].iter().map(|x| x / sigma[j]).collect());
        } else {
            break;
        }
    }
    let cols = complete_orthonormal(cols, m);
    Ok(Svd { u: ComplexMatrix::from_columns(m, &cols), sigma, v })
}

/// Extend orthonormal vectors in C^m to an orthonormal basis using standard basis candidates.
pub fn complete_orthonormal(mut cols: Vec<Vec<C64>>, m: usize) -> Vec<Vec<C64>> {
    let mut threshold = 0.5;
    while cols.len() < m {
        for k in 0..m {
            if cols.len() == m {
                break;
            }
            let mut e = vec![ZERO; m];
            e[k] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for c in &cols {
                    let proj = inner(c, &e);
                    for (x, y) in e.iter_mut().zip(c) {
                        *x -= proj * y;
                    }
                }
            }
            let nrm = vec_norm(&e);
            if nrm > threshold {
                e.iter_mut().for_each(|x| *x /= nrm);
                cols.push(e);
            }
        }
        threshold *= 0.1;
    }
    cols
}
