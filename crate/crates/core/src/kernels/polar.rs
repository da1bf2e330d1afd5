use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::{ComplexMatrix, ZERO};
use crate::tolerance::ToleranceConfig;

use super::svd::svd;

/// `T = W |T|` with `W` a partial isometry and `N(W) = N(T)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarForm {
    pub w: ComplexMatrix,
    pub modulus: ComplexMatrix,
    pub null_dim: usize,
}

/// Polar decomposition. Singular values at or below `rank_tol * sigma_max`
/// are treated as null so that `W` vanishes on the numerical kernel.
pub fn polar_decompose(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PolarForm> {
    let n = t.cols();
    let s = svd(t)?;
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let threshold = tol.rank_tol * smax;
    let rank = s.sigma.iter().take_while(|&&x| x > threshold && x > 0.0).count();
    let u_r = s.u.top_left(t.rows(), rank);
    let v_r = s.v.top_left(n, rank);
    let w = &u_r * &v_r.adjoint();
    let v_sigma = ComplexMatrix::from_fn(n, n, |i, k| if k < s.sigma.len() { s.v[(i, k)] * s.sigma[k] } else { ZERO });
    let modulus = (&v_sigma * &s.v.adjoint()).hermitian_part();
    Ok(PolarForm { w, modulus, null_dim: n - rank })
}
