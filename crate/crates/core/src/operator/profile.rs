//! Declared spectral data of |T| and related Fredholm facts.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::spectrum::{DeclaredSpectrum, Dim};

use super::seq::SeqRule;

/// How many tail terms are sampled when validating a countable description.
const TAIL_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub value: f64,
    #[serde(default = "one")]
    pub multiplicity: usize,
}

fn one() -> usize {
    1
}

/// Countably infinite run of points `rule(k)` for `k >= from`, each with the same multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTail {
    pub rule: SeqRule,
    #[serde(default = "one")]
    pub from: usize,
    #[serde(default = "one")]
    pub multiplicity: usize,
}

impl PointTail {
    pub fn sample(&self, count: usize) -> Result<Vec<f64>> {
        (self.from..self.from + count).map(|k| self.rule.eval(k)).collect()
    }
}

/// Finitely many listed points, optionally followed by a countable tail.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSequence {
    #[serde(default)]
    pub listed: Vec<SpectralPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<PointTail>,
}

impl PointSequence {
    pub fn finite(points: &[(f64, usize)]) -> Self {
        Self {
            listed: points.iter().map(|&(value, multiplicity)| SpectralPoint { value, multiplicity }).collect(),
            tail: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn is_empty(&self) -> bool {
        self.listed.is_empty() && self.tail.is_none()
    }

    /// Listed values plus the first `tail_terms` tail values.
    pub fn values(&self, tail_terms: usize) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = self.listed.iter().map(|p| p.value).collect();
        if let Some(t) = &self.tail {
            v.extend(t.sample(tail_terms)?);
        }
        Ok(v)
    }

    fn map(&self, f: &impl Fn(f64) -> f64, rule: &impl Fn(SeqRule) -> SeqRule) -> Self {
        Self {
            listed: self.listed.iter().map(|p| SpectralPoint { value: f(p.value), ..*p }).collect(),
            tail: self.tail.as_ref().map(|t| PointTail { rule: rule(t.rule.clone()), ..t.clone() }),
        }
    }
}

/// Spectral data of |T|: essential point(s), discrete points above and below,
/// kernel data and the minimum modulus. Optional declared sets for T itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub essential_points: Vec<f64>,
    #[serde(default)]
    pub upper_points: PointSequence,
    #[serde(default)]
    pub lower_points: PointSequence,
    #[serde(default)]
    pub alpha_in_point_spectrum: bool,
    #[serde(default)]
    pub alpha_eigenspace_dim: Dim,
    #[serde(default)]
    pub kernel_dim: Dim,
    #[serde(default)]
    pub cokernel_dim: Dim,
    pub min_modulus: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<f64>,
    #[serde(default)]
    pub self_adjoint: bool,
    /// Set when the operator lives on a finite-dimensional space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<DeclaredSpectrum>,
}

impl SpectralProfile {
    /// Profile with a single essential point and nothing else declared.
    pub fn essential(alpha: f64) -> Self {
        Self {
            essential_points: vec![alpha],
            upper_points: PointSequence::default(),
            lower_points: PointSequence::default(),
            alpha_in_point_spectrum: false,
            alpha_eigenspace_dim: Dim::Finite(0),
            kernel_dim: Dim::Finite(0),
            cokernel_dim: Dim::Finite(0),
            min_modulus: alpha,
            norm: None,
            self_adjoint: false,
            finite_dimension: None,
            spectrum: None,
        }
    }

    /// The essential point when it is unique.
    pub fn alpha(&self) -> Option<f64> {
        match self.essential_points.as_slice() {
            [a] => Some(*a),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OpError::Invalid(m));
        if self.essential_points.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return bad("essential points must be nonnegative reals".into());
        }
        if !(self.min_modulus.is_finite() && self.min_modulus >= 0.0) {
            return bad("min_modulus must be a nonnegative real".into());
        }
        for (name, seq) in [("upper", &self.upper_points), ("lower", &self.lower_points)] {
            if seq.listed.iter().any(|p| p.multiplicity == 0) || seq.tail.as_ref().is_some_and(|t| t.multiplicity == 0) {
                return bad(format!("{name} multiplicities must be >= 1"));
            }
        }
        if let Some(alpha) = self.alpha() {
            let upper = self.upper_points.values(TAIL_SAMPLES)?;
            if upper.iter().any(|&v| v <= alpha) {
                return bad(format!("upper points must exceed alpha = {alpha}"));
            }
            let lower = self.lower_points.values(TAIL_SAMPLES)?;
            if lower.iter().any(|&v| v >= alpha || v < 0.0) {
                return bad(format!("lower points must lie in [0, alpha = {alpha})"));
            }
            if let Some(t) = &self.upper_points.tail {
                let s = t.sample(TAIL_SAMPLES)?;
                if s.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("upper tail must strictly decrease toward alpha".into());
                }
            }
            if let Some(t) = &self.lower_points.tail {
                let s = t.sample(TAIL_SAMPLES)?;
                if s.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("lower tail must strictly increase toward alpha".into());
                }
            }
        }
        if let Some(s) = &self.spectrum {
            if !(s.spectrum.is_well_formed() && s.essential.is_well_formed()) {
                return bad("malformed spectral regions".into());
            }
        }
        Ok(())
    }

    /// Smallest declared spectral value of |T|.
    pub fn smallest_declared_value(&self) -> Result<Option<f64>> {
        let mut all = self.lower_points.values(1)?;
        // an upper tail decreases toward alpha, which is already in the essential set
        all.extend(self.upper_points.values(0)?);
        all.extend(self.essential_points.iter().copied());
        if self.kernel_dim != Dim::Finite(0) {
            all.push(0.0);
        }
        Ok(all.into_iter().reduce(f64::min))
    }

    /// Profile of |T*| given this profile of |T|: identical away from zero,
    /// with kernel and cokernel exchanged.
    pub fn adjoint_profile(&self) -> Self {
        let mut p = self.clone();
        std::mem::swap(&mut p.kernel_dim, &mut p.cokernel_dim);
        if p.cokernel_dim != Dim::Finite(0) || p.kernel_dim != Dim::Finite(0) {
            let had_zero = self.kernel_dim != Dim::Finite(0);
            let has_zero = p.kernel_dim != Dim::Finite(0);
            if had_zero && !has_zero {
                p.lower_points.listed.retain(|pt| pt.value != 0.0);
            } else if has_zero && !had_zero {
                let mult = p.kernel_dim.value().unwrap_or(1).max(1);
                p.lower_points.listed.insert(0, SpectralPoint { value: 0.0, multiplicity: mult });
            }
        }
        p.min_modulus = if p.kernel_dim != Dim::Finite(0) { 0.0 } else { p.min_modulus };
        p.spectrum = self.spectrum.as_ref().map(conjugate_spectrum);
        p
    }

    /// Profile of |cT| for a scalar of modulus `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(OpError::Invalid(format!("profile scaling needs a positive factor, got {c}")));
        }
        let f = move |s: f64| c * s;
        let rule = move |r: SeqRule| SeqRule::mul(SeqRule::Const(c), r);
        let mut p = self.clone();
        p.essential_points = self.essential_points.iter().map(|&a| f(a)).collect();
        p.upper_points = self.upper_points.map(&f, &rule);
        p.lower_points = self.lower_points.map(&f, &rule);
        p.min_modulus = f(self.min_modulus);
        p.norm = self.norm.map(f);
        p.spectrum = None;
        Ok(p)
    }

    /// Profile of |S + i mu| for self-adjoint S with this profile of |S|:
    /// every spectral value s maps to sqrt(s^2 + mu^2).
    pub fn imaginary_shift(&self, mu: f64) -> Result<Self> {
        if !self.self_adjoint {
            return Err(OpError::Invalid("imaginary shift needs a self-adjoint profile".into()));
        }
        let mu2 = mu * mu;
        let f = move |s: f64| (s * s + mu2).sqrt();
        let rule = move |r: SeqRule| SeqRule::sqrt(SeqRule::add(SeqRule::mul(r.clone(), r), SeqRule::Const(mu2)));
        let mut p = self.clone();
        p.essential_points = self.essential_points.iter().map(|&a| f(a)).collect();
        p.upper_points = self.upper_points.map(&f, &rule);
        p.lower_points = self.lower_points.map(&f, &rule);
        p.min_modulus = f(self.min_modulus);
        p.norm = self.norm.map(f);
        p.self_adjoint = false;
        p.spectrum = None;
        if mu != 0.0 {
            // S + i mu is invertible: no kernel, no cokernel
            p.lower_points.listed.retain(|pt| pt.value != 0.0);
            p.kernel_dim = Dim::Finite(0);
            p.cokernel_dim = Dim::Finite(0);
        }
        Ok(p)
    }
}

fn conjugate_spectrum(s: &DeclaredSpectrum) -> DeclaredSpectrum {
    let conj = |d: &crate::spectrum::SpectrumDescription| {
        let mut d = d.clone();
        d.discrete_points.iter_mut().for_each(|p| p.value = p.value.conj());
        d
    };
    DeclaredSpectrum {
        spectrum: conj(&s.spectrum),
        essential: conj(&s.essential),
        index_regions: s
            .index_regions
            .iter()
            .map(|r| crate::spectrum::IndexedRegion { region: r.region, index: -r.index })
            .collect(),
        discrete: s.discrete.iter().map(|p| crate::spectrum::DiscretePoint { value: p.value.conj(), index: -p.index, ..*p }).collect(),
    }
}
