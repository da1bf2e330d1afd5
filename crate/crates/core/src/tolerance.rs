use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};

/// Numerical thresholds shared by every predicate and decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    pub eq_tol: f64,
    pub psd_tol: f64,
    pub rank_tol: f64,
    pub cluster_gap: f64,
    pub interior_margin_factor: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eq_tol: 1e-10,
            psd_tol: 1e-10,
            rank_tol: 1e-10,
            cluster_gap: 1e-6,
            interior_margin_factor: 2,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.eq_tol, self.psd_tol, self.rank_tol, self.cluster_gap]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive || self.interior_margin_factor < 1 {
            return Err(OpError::Invalid(format!("tolerances must be strictly positive: {self:?}")));
        }
        Ok(())
    }

    /// Interior margin for an operator of the given bandwidth.
    pub fn margin(&self, bandwidth: usize) -> usize {
        self.interior_margin_factor * bandwidth
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let t = ToleranceConfig::default();
        t.validate().unwrap();
        assert_eq!(t.margin(2), 4);
    }

    #[test]
    fn rejects_zero() {
        let t = ToleranceConfig { eq_tol: 0.0, ..Default::default() };
        assert!(t.validate().is_err());
        let t = ToleranceConfig { interior_margin_factor: 0, ..Default::default() };
        assert!(t.validate().is_err());
    }
}
