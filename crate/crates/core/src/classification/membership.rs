//! AN / AM / closure-AN membership, Fredholm data and Weyl spectra from profiles.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::operator::SpectralProfile;
use crate::spectrum::{Dim, SpectrumDescription};

/// Single essential point of |T| and finitely many spectral points below it.
/// Every operator on a finite-dimensional space qualifies.
pub fn an_membership(p: &SpectralProfile) -> bool {
    p.finite_dimension.is_some() || (p.alpha().is_some() && p.lower_points.is_finite())
}

/// Single essential point of |T| and finitely many spectral points above it.
pub fn am_membership(p: &SpectralProfile) -> bool {
    p.finite_dimension.is_some() || (p.alpha().is_some() && p.upper_points.is_finite())
}

/// Norm closure of AN: the essential spectrum of |T| is a single point.
pub fn closure_an_membership(p: &SpectralProfile) -> bool {
    p.finite_dimension.is_some() || p.alpha().is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmData {
    pub kernel_dim: Dim,
    pub cokernel_dim: Dim,
    /// `dim N(T) - dim N(T*)` when both are finite.
    pub index: Option<i64>,
    pub is_fredholm: bool,
    /// `m_e(T)`, the bottom of the essential spectrum of |T|.
    pub essential_min_modulus: Option<f64>,
}

pub fn fredholm_data(p: &SpectralProfile) -> FredholmData {
    let index = match (p.kernel_dim.value(), p.cokernel_dim.value()) {
        (Some(k), Some(c)) => Some(k as i64 - c as i64),
        _ => None,
    };
    let me = p.essential_points.iter().copied().reduce(f64::min);
    let closed_range = p.finite_dimension.is_some() || me.is_some_and(|m| m > 0.0);
    FredholmData {
        kernel_dim: p.kernel_dim,
        cokernel_dim: p.cokernel_dim,
        index,
        is_fredholm: closed_range && index.is_some(),
        essential_min_modulus: me,
    }
}

/// Weyl spectrum from declared data; empty for operators on finite-dimensional spaces.
pub fn weyl_spectrum_symbolic(p: &SpectralProfile) -> Result<SpectrumDescription> {
    if p.finite_dimension.is_some() {
        return Ok(SpectrumDescription::default());
    }
    p.spectrum
        .as_ref()
        .map(|s| s.weyl())
        .ok_or_else(|| OpError::SpectrumUndeclared("profile declares no spectral sets for T".into()))
}
