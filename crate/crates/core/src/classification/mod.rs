//! Class predicates, essential-spectrum estimation and membership tests.
//!
//! Every flag records how it was obtained: from the AST and declared profile
//! (`symbolic`), from a whole section (`full`), from the section away from its
//! truncation boundary (`interior`), from random vectors (`sampled`) or from a
//! family of sections (`estimated`).

mod estimate;
mod membership;
mod predicates;
pub mod symbolic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use estimate::{
    estimate_essential_spectrum, estimate_from_spectra, estimate_unchecked, power_law_limit, section_spectra, EssentialCluster,
    EssentialEstimate, Evidence, SpectrumSource,
};
pub use membership::{am_membership, an_membership, closure_an_membership, fredholm_data, weyl_spectrum_symbolic, FredholmData};
pub use predicates::{
    interior_self_commutator, is_hyponormal_full, is_hyponormal_interior, is_normal, is_normal_interior, is_paranormal_sampled,
    is_positive, is_quasinormal, is_quasinormal_interior, is_selfadjoint, is_star_paranormal_sampled, paranormal_sampled_on, Check,
    SampledCheck,
};

use crate::error::{OpError, Result};
use crate::exec::{self, Mode};
use crate::operator::{render, SpectralProfile, StructuredOperator};
use crate::section::op_interior;
use crate::spectrum::SpectrumDescription;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Full,
    Interior,
    Symbolic,
    Sampled,
    Estimated,
}

/// Which evaluation layers to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layers {
    Symbolic,
    Numeric,
    #[default]
    Both,
}

impl Layers {
    pub fn symbolic(self) -> bool {
        self != Layers::Numeric
    }

    pub fn numeric(self) -> bool {
        self != Layers::Symbolic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<f64>,
    pub mode: EvalMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl Flag {
    fn symbolic(holds: bool) -> Self {
        Self { holds, defect: None, mode: EvalMode::Symbolic, dim: None }
    }

    fn numeric(c: Check, mode: EvalMode, n: usize) -> Self {
        Self { holds: c.holds, defect: Some(c.defect), mode, dim: Some(n) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub flags: BTreeMap<String, Vec<Flag>>,
    pub profile_used: Option<SpectralProfile>,
    pub dims_tested: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub essential_estimate: Option<EssentialEstimate>,
    /// Set when the estimate contradicts the declared profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate_mismatch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fredholm: Option<FredholmData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weyl_spectrum: Option<SpectrumDescription>,
}

impl ClassificationReport {
    /// Whether `class` holds in every recorded evaluation with the given mode.
    pub fn holds(&self, class: &str, mode: EvalMode) -> Option<bool> {
        let flags: Vec<&Flag> = self.flags.get(class)?.iter().filter(|f| f.mode == mode).collect();
        if flags.is_empty() {
            None
        } else {
            Some(flags.iter().all(|f| f.holds))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub dims: Vec<usize>,
    pub tol: ToleranceConfig,
    pub seed: u64,
    /// Random vectors per paranormality test.
    pub samples: usize,
    pub layers: Layers,
    pub exec: Mode,
}

impl ClassifyOptions {
    pub fn new(dims: Vec<usize>) -> Self {
        Self { dims, tol: ToleranceConfig::default(), seed: 0, samples: 64, layers: Layers::Both, exec: Mode::Auto }
    }
}

pub fn classify(op: &StructuredOperator, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    opts.tol.validate()?;
    if opts.layers.numeric() && opts.dims.is_empty() {
        return Err(OpError::Invalid("numeric classification needs at least one dimension".into()));
    }
    if opts.dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OpError::Invalid(format!("dimensions must be strictly ascending: {:?}", opts.dims)));
    }
    let profile = op.effective_profile();
    let mut flags: BTreeMap<String, Vec<Flag>> = BTreeMap::new();
    let mut push = |k: &str, f: Flag| flags.entry(k.to_string()).or_default().push(f);

    let mut report_fredholm = None;
    let mut weyl = None;
    if opts.layers.symbolic() {
        for (name, v) in [
            ("normal", symbolic::normal(op)),
            ("quasinormal", symbolic::quasinormal(op)),
            ("hyponormal", symbolic::hyponormal(op)),
            ("self_adjoint", symbolic::selfadjoint(op)),
        ] {
            if let Some(h) = v {
                push(name, Flag::symbolic(h));
            }
        }
        if let Some(p) = &profile {
            push("an", Flag::symbolic(an_membership(p)));
            push("am", Flag::symbolic(am_membership(p)));
            push("closure_an", Flag::symbolic(closure_an_membership(p)));
            report_fredholm = Some(fredholm_data(p));
            weyl = weyl_spectrum_symbolic(p).ok();
        }
    }

    let mut estimate = None;
    let mut mismatch = None;
    if opts.layers.numeric() {
        let per_dim = exec::try_map(&opts.dims, opts.exec, |&n| numeric_flags(op, n, opts))?;
        for (n_flags, _) in per_dim.into_iter().zip(&opts.dims) {
            for (k, f) in n_flags {
                push(k, f);
            }
        }
        if opts.dims.len() >= 3 {
            let est = estimate::estimate_unchecked(op, &opts.dims, &opts.tol, opts.exec)?;
            let last = *opts.dims.last().expect("nonempty");
            push(
                "closure_an",
                Flag { holds: est.modulus_points().len() == 1, defect: None, mode: EvalMode::Estimated, dim: Some(last) },
            );
            if let Some(p) = &profile {
                if p.finite_dimension.is_none() {
                    mismatch = est.check_against(&p.essential_points, &opts.tol).err().map(|e| e.to_string());
                }
            }
            estimate = Some(est);
        }
    }

    Ok(ClassificationReport {
        flags,
        profile_used: profile,
        dims_tested: if opts.layers.numeric() { opts.dims.clone() } else { Vec::new() },
        essential_estimate: estimate,
        estimate_mismatch: mismatch,
        fredholm: report_fredholm,
        weyl_spectrum: weyl,
    })
}

fn numeric_flags(op: &StructuredOperator, n: usize, opts: &ClassifyOptions) -> Result<Vec<(&'static str, Flag)>> {
    let tol = &opts.tol;
    let t = render(op, n)?;
    let b = op.bandwidth();
    let mut out = vec![
        ("self_adjoint", Flag::numeric(is_selfadjoint(&t, tol)?, EvalMode::Full, n)),
        ("positive", Flag::numeric(is_positive(&t, tol)?, EvalMode::Full, n)),
        ("hyponormal", Flag::numeric(is_hyponormal_full(&t, tol)?, EvalMode::Full, n)),
    ];
    if op_interior(op, n, tol).is_ok() {
        out.push(("normal", Flag::numeric(is_normal_interior(op, n, tol)?, EvalMode::Interior, n)));
        out.push(("quasinormal", Flag::numeric(is_quasinormal_interior(op, n, tol)?, EvalMode::Interior, n)));
        out.push(("hyponormal", Flag::numeric(is_hyponormal_interior(op, n, tol)?, EvalMode::Interior, n)));
    }
    let support = n.saturating_sub(tol.margin(b).max(2 * b));
    if support > 0 {
        for (name, star) in [("paranormal", false), ("star_paranormal", true)] {
            let s = paranormal_sampled_on(&t, support, opts.samples, opts.seed ^ n as u64, star, tol);
            out.push((name, Flag { holds: s.holds, defect: Some(s.worst_ratio), mode: EvalMode::Sampled, dim: Some(n) }));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::catalog;

    #[test]
    fn example_report() {
        let r = classify(&catalog::hyponormal_example(), &ClassifyOptions::new(vec![64, 128, 256])).unwrap();
        assert_eq!(r.holds("hyponormal", EvalMode::Interior), Some(true));
        assert_eq!(r.holds("closure_an", EvalMode::Symbolic), Some(true));
        assert_eq!(r.holds("closure_an", EvalMode::Estimated), Some(true));
        assert_eq!(r.holds("quasinormal", EvalMode::Interior), Some(false));
        assert_eq!(r.holds("an", EvalMode::Symbolic), Some(false));
        assert_eq!(r.holds("am", EvalMode::Symbolic), Some(true));
        assert!(r.estimate_mismatch.is_none());
        let again = classify(&catalog::hyponormal_example(), &ClassifyOptions::new(vec![64, 128, 256])).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn identity_report() {
        let r = classify(&catalog::identity(), &ClassifyOptions::new(vec![8, 16, 32])).unwrap();
        for (class, flags) in &r.flags {
            assert!(flags.iter().all(|f| f.holds), "{class}: {flags:?}");
        }
    }

    #[test]
    fn dims_must_ascend() {
        assert!(classify(&catalog::identity(), &ClassifyOptions::new(vec![8, 4])).is_err());
        assert!(classify(&catalog::identity(), &ClassifyOptions::new(vec![])).is_err());
    }
}
