//! Numeric class predicates on sections: full-matrix and interior variants.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::{cogram, gram, hermitian_norm, operator_norm, psd_check};
use crate::matrix::{vec_norm, ComplexMatrix, C64};
use crate::operator::{render, StructuredOperator};
use crate::section::op_interior;
use crate::tolerance::ToleranceConfig;

/// Outcome of a predicate: whether it holds and the measured defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub holds: bool,
    pub defect: f64,
}

/// `||TT* - T*T||` against `eq_tol ||T||^2`.
pub fn is_normal(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Check> {
    let d = gram(a).try_sub(&cogram(a))?;
    let defect = hermitian_norm(&d)?;
    let scale = operator_norm(a)?;
    Ok(Check { holds: defect <= tol.eq_tol * scale * scale, defect })
}

/// `||T - T*||` against `eq_tol ||T||`.
pub fn is_selfadjoint(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Check> {
    let defect = operator_norm(&a.try_sub(&a.adjoint())?)?;
    Ok(Check { holds: defect <= tol.eq_tol * operator_norm(a)?, defect })
}

/// Defect is minus the smallest eigenvalue of the Hermitian part; a non-Hermitian
/// matrix never passes.
pub fn is_positive(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Check> {
    let sa = is_selfadjoint(a, tol)?;
    let (psd, min) = psd_check(&a.hermitian_part(), tol)?;
    Ok(Check { holds: sa.holds && psd, defect: -min })
}

/// `||T(T*T) - (T*T)T||` against `eq_tol ||T||^3`.
pub fn is_quasinormal(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Check> {
    let g = gram(a);
    let defect = operator_norm(&(a * &g).try_sub(&(&g * a))?)?;
    let s = operator_norm(a)?;
    Ok(Check { holds: defect <= tol.eq_tol * s * s * s, defect })
}

/// PSD test of `T*T - TT*` on the whole matrix; defect is the smallest eigenvalue.
pub fn is_hyponormal_full(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Check> {
    let (holds, min) = psd_check(&gram(a).try_sub(&cogram(a))?, tol)?;
    Ok(Check { holds, defect: min })
}

fn interior(op: &StructuredOperator, n: usize, tol: &ToleranceConfig) -> Result<(ComplexMatrix, usize)> {
    let keep = op_interior(op, n, tol)?;
    Ok((render(op, n)?, keep))
}

/// `T*T - TT*` of the section, compressed to the interior coordinates.
pub fn interior_self_commutator(t: &ComplexMatrix, keep: usize) -> Result<ComplexMatrix> {
    Ok(gram(t).try_sub(&cogram(t))?.leading(keep))
}

/// Hyponormality away from the truncation boundary: `P (T*T - TT*) P >= 0`
/// with `P` the projection onto the interior coordinates.
pub fn is_hyponormal_interior(op: &StructuredOperator, n: usize, tol: &ToleranceConfig) -> Result<Check> {
    let (t, keep) = interior(op, n, tol)?;
    let (holds, min) = psd_check(&interior_self_commutator(&t, keep)?, tol)?;
    Ok(Check { holds, defect: min })
}

/// Interior self-commutator norm against `eq_tol ||T_n||^2`.
pub fn is_normal_interior(op: &StructuredOperator, n: usize, tol: &ToleranceConfig) -> Result<Check> {
    let (t, keep) = interior(op, n, tol)?;
    let defect = hermitian_norm(&interior_self_commutator(&t, keep)?)?;
    let s = operator_norm(&t)?;
    Ok(Check { holds: defect <= tol.eq_tol * s * s, defect })
}

pub fn is_quasinormal_interior(op: &StructuredOperator, n: usize, tol: &ToleranceConfig) -> Result<Check> {
    let (t, keep) = interior(op, n, tol)?;
    let g = gram(&t);
    let c = (&t * &g).try_sub(&(&g * &t))?.leading(keep);
    let defect = operator_norm(&c)?;
    let s = operator_norm(&t)?;
    Ok(Check { holds: defect <= tol.eq_tol * s * s * s, defect })
}

/// Result of a sampled inequality test: a refuter, never a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledCheck {
    pub holds: bool,
    /// Largest `||Tx||^2 / (||T^2 x|| ||x||)` (resp. with `T*x`) seen; infinite when the
    /// denominator vanishes and the numerator does not.
    pub worst_ratio: f64,
    pub vectors: usize,
}

/// `||Tx||^2 <= ||T^2 x|| ||x||` on all basis vectors and `samples` random unit vectors.
pub fn is_paranormal_sampled(a: &ComplexMatrix, samples: usize, seed: u64, tol: &ToleranceConfig) -> SampledCheck {
    sampled(a, a.rows(), samples, seed, false, tol)
}

/// `||T*x||^2 <= ||T^2 x|| ||x||` on all basis vectors and `samples` random unit vectors.
pub fn is_star_paranormal_sampled(a: &ComplexMatrix, samples: usize, seed: u64, tol: &ToleranceConfig) -> SampledCheck {
    sampled(a, a.rows(), samples, seed, true, tol)
}

/// Sampled test restricted to vectors supported on the first `support` coordinates,
/// which keeps `T^2 x` and `T* x` free of truncation effects when `support <= n - 2b`.
pub fn paranormal_sampled_on(
    a: &ComplexMatrix,
    support: usize,
    samples: usize,
    seed: u64,
    star: bool,
    tol: &ToleranceConfig,
) -> SampledCheck {
    sampled(a, support, samples, seed, star, tol)
}

fn sampled(a: &ComplexMatrix, support: usize, samples: usize, seed: u64, star: bool, tol: &ToleranceConfig) -> SampledCheck {
    let n = a.rows();
    let support = support.min(n);
    let adj = star.then(|| a.adjoint());
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let ratio = |x: &[C64]| -> f64 {
        let tx = a.mat_vec(x);
        let num = match &adj {
            Some(s) => vec_norm(&s.mat_vec(x)),
            None => vec_norm(&tx),
        }
        .powi(2);
        let den = vec_norm(&a.mat_vec(&tx)) * vec_norm(x);
        if num <= 1e-28 * scale * scale {
            0.0
        } else if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    };
    let mut worst = 0.0f64;
    let mut x = vec![C64::new(0.0, 0.0); n];
    for k in 0..support {
        x[k] = C64::new(1.0, 0.0);
        worst = worst.max(ratio(&x));
        x[k] = C64::new(0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        for (k, slot) in x.iter_mut().enumerate() {
            *slot = if k < support {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            } else {
                C64::new(0.0, 0.0)
            };
        }
        let norm = vec_norm(&x);
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
            worst = worst.max(ratio(&x));
        }
    }
    SampledCheck { holds: worst <= 1.0 + tol.eq_tol.max(1e-12), worst_ratio: worst, vectors: support + samples }
}
