//! Essential-spectrum estimation from families of sections.
//!
//! Two kinds of evidence are collected over ascending dimensions: clusters whose
//! multiplicity keeps growing (eigenvalues of infinite multiplicity), and runs of
//! newly appearing eigenvalues that close in on a point (accumulation points),
//! whose limit is extrapolated by fitting `x(n) = L + C n^-p` to the last three
//! dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::exec::{self, Mode};
use crate::kernels::hermitian_eigvals;
use crate::operator::StructuredOperator;
use crate::section::Section;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    GrowingMultiplicity,
    Accumulation,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    /// Eigenvalues of the sections of a self-adjoint operator.
    SelfAdjoint,
    /// Singular values, i.e. the spectrum of |T| on the sections.
    Modulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialCluster {
    pub center: f64,
    pub uncertainty: f64,
    /// Fraction of dimension steps that behaved as the evidence predicts.
    pub confidence: f64,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialEstimate {
    pub dims: Vec<usize>,
    pub source: SpectrumSource,
    pub clusters: Vec<EssentialCluster>,
}

impl EssentialEstimate {
    pub fn centers(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.center).collect()
    }

    pub fn singleton(&self) -> Option<f64> {
        match self.clusters.as_slice() {
            [c] => Some(c.center),
            _ => None,
        }
    }

    /// Essential points of |T| implied by the estimate.
    pub fn modulus_points(&self) -> Vec<EssentialCluster> {
        let mut out: Vec<EssentialCluster> = Vec::new();
        for c in &self.clusters {
            let m = EssentialCluster { center: c.center.abs(), ..c.clone() };
            match out.iter_mut().find(|o| (o.center - m.center).abs() <= o.uncertainty + m.uncertainty) {
                Some(o) if m.uncertainty < o.uncertainty => *o = m,
                Some(_) => {}
                None => out.push(m),
            }
        }
        out.sort_by(|a, b| a.center.total_cmp(&b.center));
        out
    }

    /// Compare against declared essential points of |T|.
    pub fn check_against(&self, declared: &[f64], tol: &ToleranceConfig) -> Result<()> {
        let est = self.modulus_points();
        let near = |c: &EssentialCluster, d: f64| (c.center - d).abs() <= tol.cluster_gap.max(c.uncertainty);
        for &d in declared {
            if !est.iter().any(|c| near(c, d)) {
                return Err(OpError::Inconsistent(format!(
                    "declared essential point {d} not found; estimate {:?}",
                    est.iter().map(|c| c.center).collect::<Vec<_>>()
                )));
            }
        }
        for c in &est {
            if !declared.iter().any(|&d| near(c, d)) {
                return Err(OpError::Inconsistent(format!(
                    "estimated essential point {} (+/- {}) is not declared ({declared:?})",
                    c.center, c.uncertainty
                )));
            }
        }
        Ok(())
    }
}

/// Spectra of the sections at each dimension, in parallel over dimensions.
pub fn section_spectra(op: &StructuredOperator, dims: &[usize], mode: Mode) -> Result<(SpectrumSource, Vec<Vec<f64>>)> {
    validate_dims(dims)?;
    let first = Section::new(op, dims[0])?;
    let sa = first.t.hermitian_asymmetry() <= 1e-14 * first.t.max_abs();
    let source = if sa { SpectrumSource::SelfAdjoint } else { SpectrumSource::Modulus };
    let spectra = exec::try_map(dims, mode, |&n| -> Result<Vec<f64>> {
        let s = Section::new(op, n)?;
        match source {
            SpectrumSource::SelfAdjoint => hermitian_eigvals(&s.t.hermitian_part()),
            SpectrumSource::Modulus => {
                let mut v: Vec<f64> = hermitian_eigvals(&s.gram())?.into_iter().map(|l| l.max(0.0).sqrt()).collect();
                v.sort_by(f64::total_cmp);
                Ok(v)
            }
        }
    })?;
    Ok((source, spectra))
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 3 {
        return Err(OpError::Invalid("essential spectrum estimation needs at least three dimensions".into()));
    }
    if dims.windows(2).any(|w| w[1] <= w[0]) || dims[0] == 0 {
        return Err(OpError::Invalid(format!("dimensions must be positive and strictly ascending: {dims:?}")));
    }
    Ok(())
}

/// Estimate and cross-check against the declared profile, if any.
pub fn estimate_essential_spectrum(op: &StructuredOperator, dims: &[usize], tol: &ToleranceConfig) -> Result<EssentialEstimate> {
    let est = estimate_unchecked(op, dims, tol, Mode::Auto)?;
    if let Some(p) = op.profile() {
        if p.finite_dimension.is_none() {
            est.check_against(&p.essential_points, tol)?;
        }
    }
    Ok(est)
}

pub fn estimate_unchecked(op: &StructuredOperator, dims: &[usize], tol: &ToleranceConfig, mode: Mode) -> Result<EssentialEstimate> {
    let (source, spectra) = section_spectra(op, dims, mode)?;
    Ok(EssentialEstimate { dims: dims.to_vec(), source, clusters: estimate_from_spectra(dims, &spectra, tol)? })
}

#[derive(Debug, Clone, Copy)]
struct Group {
    center: f64,
    count: usize,
    lo: f64,
    hi: f64,
}

/// Merge sorted values closer than `gap`; centers are means.
fn clusters(values: &[f64], gap: f64) -> Vec<Group> {
    let mut out: Vec<Group> = Vec::new();
    let mut sum = 0.0;
    for &v in values {
        match out.last_mut() {
            Some(g) if v - g.hi < gap => {
                g.count += 1;
                g.hi = v;
                sum += v;
                g.center = sum / g.count as f64;
            }
            _ => {
                sum = v;
                out.push(Group { center: v, count: 1, lo: v, hi: v });
            }
        }
    }
    out
}

fn count_in(values: &[f64], lo: f64, hi: f64) -> usize {
    values.iter().filter(|&&v| v >= lo && v <= hi).count()
}

/// Values of `new` with no partner within `delta` in `old` (both sorted).
fn unmatched(old: &[f64], new: &[f64], delta: f64) -> Vec<f64> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while j < new.len() {
        if i < old.len() && (old[i] - new[j]).abs() <= delta {
            i += 1;
            j += 1;
        } else if i < old.len() && old[i] < new[j] {
            i += 1;
        } else {
            out.push(new[j]);
            j += 1;
        }
    }
    out
}

/// Fit `x = L + C n^-p` through three points; `None` when the data do not converge.
pub fn power_law_limit(ns: [f64; 3], xs: [f64; 3]) -> Option<f64> {
    let d1 = xs[1] - xs[0];
    let d2 = xs[2] - xs[1];
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    if d2.abs() <= 1e-14 * scale {
        return Some(xs[2]);
    }
    if d1 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let rho = d2 / d1;
    let ratio = |p: f64| (ns[2].powf(-p) - ns[1].powf(-p)) / (ns[1].powf(-p) - ns[0].powf(-p));
    let (mut lo, mut hi) = (1e-6f64, 64.0f64);
    if rho <= ratio(hi) {
        return Some(xs[2]);
    }
    if rho >= ratio(lo) {
        return None;
    }
    // ratio(p) decreases in p
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let c = d2 / (ns[2].powf(-p) - ns[1].powf(-p));
    Some(xs[2] - c * ns[2].powf(-p))
}

/// The evidence-gathering core, on precomputed sorted spectra.
pub fn estimate_from_spectra(dims: &[usize], spectra: &[Vec<f64>], tol: &ToleranceConfig) -> Result<Vec<EssentialCluster>> {
    validate_dims(dims)?;
    if spectra.len() != dims.len() {
        return Err(OpError::DimensionMismatch(format!("{} spectra for {} dimensions", spectra.len(), dims.len())));
    }
    let gap = tol.cluster_gap;
    let last = spectra.last().expect("at least three spectra");
    let scale = last.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let steps = (dims.len() - 1) as f64;
    let mut found: Vec<EssentialCluster> = Vec::new();
    let mut bands: Vec<(f64, f64)> = Vec::new();

    for g in clusters(last, gap) {
        let (lo, hi) = (g.lo - gap, g.hi + gap);
        let counts: Vec<usize> = spectra.iter().map(|s| count_in(s, lo, hi)).collect();
        let increasing = counts.windows(2).filter(|w| w[1] > w[0]).count();
        let monotone = counts.windows(2).all(|w| w[1] >= w[0]);
        if counts[0] >= 1 && g.count >= 3 && monotone && increasing as f64 == steps {
            found.push(EssentialCluster {
                center: g.center,
                uncertainty: gap.max(g.hi - g.lo),
                confidence: increasing as f64 / steps,
                evidence: Evidence::GrowingMultiplicity,
            });
            bands.push((lo, hi));
        }
    }

    let outside = |v: &f64| !bands.iter().any(|&(lo, hi)| *v >= lo && *v <= hi);
    let rest: Vec<Vec<f64>> = spectra.iter().map(|s| s.iter().copied().filter(outside).collect()).collect();
    let delta = gap.max(1e-9 * scale);
    let fresh = unmatched(&rest[rest.len() - 2], &rest[rest.len() - 1], delta);
    let tail = rest.last().expect("nonempty");
    for run in split_runs(&fresh) {
        if run.len() < 3 {
            continue;
        }
        let first_gap = run[1] - run[0];
        let last_gap = run[run.len() - 1] - run[run.len() - 2];
        if first_gap == last_gap {
            continue;
        }
        let downward = first_gap < last_gap;
        let track: Vec<(f64, f64)> = if downward {
            let below = tail.iter().copied().filter(|&v| v < run[0]).fold(f64::NEG_INFINITY, f64::max);
            let floor = if below.is_finite() { 0.5 * (below + run[0]) } else { f64::NEG_INFINITY };
            dims.iter()
                .zip(&rest)
                .filter_map(|(&n, s)| s.iter().copied().filter(|&v| v >= floor).reduce(f64::min).map(|x| (n as f64, x)))
                .collect()
        } else {
            let top = run[run.len() - 1];
            let above = tail.iter().copied().filter(|&v| v > top).fold(f64::INFINITY, f64::min);
            let ceil = if above.is_finite() { 0.5 * (above + top) } else { f64::INFINITY };
            dims.iter()
                .zip(&rest)
                .filter_map(|(&n, s)| s.iter().copied().filter(|&v| v <= ceil).reduce(f64::max).map(|x| (n as f64, x)))
                .collect()
        };
        if track.len() < 3 {
            continue;
        }
        let k = track.len();
        let ns = [track[k - 3].0, track[k - 2].0, track[k - 1].0];
        let xs = [track[k - 3].1, track[k - 2].1, track[k - 1].1];
        let Some(limit) = power_law_limit(ns, xs) else { continue };
        let diffs: Vec<f64> = track.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
        let shrinking = diffs.windows(2).filter(|d| d[1] <= d[0]).count();
        let confidence = if diffs.len() < 2 { 1.0 } else { shrinking as f64 / (diffs.len() - 1) as f64 };
        found.push(EssentialCluster {
            center: limit,
            uncertainty: gap.max((xs[2] - limit).abs()).max((xs[2] - xs[1]).abs()),
            confidence,
            evidence: Evidence::Accumulation,
        });
    }

    Ok(merge(found))
}

/// Split sorted values where a gap exceeds eight times the median gap.
fn split_runs(values: &[f64]) -> Vec<Vec<f64>> {
    if values.len() < 2 {
        return vec![values.to_vec()];
    }
    let mut gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let mut runs = vec![vec![values[0]]];
    for (i, g) in gaps.drain(..).enumerate() {
        if g > 8.0 * median {
            runs.push(Vec::new());
        }
        runs.last_mut().expect("nonempty").push(values[i + 1]);
    }
    runs
}

fn merge(mut found: Vec<EssentialCluster>) -> Vec<EssentialCluster> {
    found.sort_by(|a, b| a.center.total_cmp(&b.center));
    let mut out: Vec<EssentialCluster> = Vec::new();
    for c in found {
        match out.last_mut() {
            Some(o) if (c.center - o.center).abs() <= o.uncertainty + c.uncertainty => {
                let growing = |e: Evidence| e != Evidence::Accumulation;
                let (keep, other) = if growing(o.evidence) || (!growing(c.evidence) && o.uncertainty <= c.uncertainty) {
                    (o.clone(), c)
                } else {
                    (c, o.clone())
                };
                let evidence = if keep.evidence == other.evidence { keep.evidence } else { Evidence::Both };
                *o = EssentialCluster {
                    center: keep.center,
                    uncertainty: keep.uncertainty,
                    confidence: keep.confidence.max(other.confidence),
                    evidence,
                };
            }
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{catalog, SeqRule};

    #[test]
    fn power_law_is_exact_on_power_laws() {
        let l = power_law_limit([64.0, 100.0, 256.0], [3.0 + 2.0 / 64.0, 3.0 + 2.0 / 100.0, 3.0 + 2.0 / 256.0]).unwrap();
        assert!((l - 3.0).abs() < 1e-12);
        let l = power_law_limit([1.0, 2.0, 4.0], [1.0, 1.0 + 1e-20, 1.0]).unwrap();
        assert_eq!(l, 1.0);
        assert!(power_law_limit([1.0, 2.0, 4.0], [0.0, 1.0, 3.0]).is_none());
    }

    #[test]
    fn reciprocal_diagonal_accumulates_at_zero() {
        let tol = ToleranceConfig::default();
        let est = estimate_essential_spectrum(&catalog::reciprocal_diagonal(), &[64, 128, 256], &tol).unwrap();
        assert_eq!(est.clusters.len(), 1);
        assert!(est.clusters[0].center.abs() < 1e-6);
        assert_eq!(est.source, SpectrumSource::SelfAdjoint);
    }

    #[test]
    fn example_modulus_at_one() {
        let tol = ToleranceConfig::default();
        let est = estimate_essential_spectrum(&catalog::hyponormal_example(), &[64, 128, 256], &tol).unwrap();
        assert_eq!(est.source, SpectrumSource::Modulus);
        assert_eq!(est.singleton(), Some(1.0));
    }

    #[test]
    fn alternating_diagonal_has_two_points() {
        let tol = ToleranceConfig::default();
        let rule = SeqRule::parity(SeqRule::Const(2.0), SeqRule::add(SeqRule::Const(1.0), SeqRule::reciprocal(1.0, 1.0, 0.0)));
        let op = StructuredOperator::diagonal(rule, 1.0);
        let est = estimate_unchecked(&op, &[64, 128, 256], &tol, Mode::Auto).unwrap();
        let c = est.centers();
        assert_eq!(c.len(), 2, "{est:?}");
        assert!((c[0] - 1.0).abs() < 1e-6);
        assert_eq!(c[1], 2.0);
        assert_eq!(est.clusters[1].evidence, Evidence::GrowingMultiplicity);
    }

    #[test]
    fn mismatch_is_reported() {
        let tol = ToleranceConfig::default();
        let mut p = catalog::reciprocal_diagonal().profile().unwrap().clone();
        p.essential_points = vec![0.5];
        let op = catalog::reciprocal_diagonal().with_profile(p);
        assert!(matches!(estimate_essential_spectrum(&op, &[64, 128, 256], &tol), Err(OpError::Inconsistent(_))));
        assert!(estimate_essential_spectrum(&op, &[64, 128], &tol).is_err());
    }
}
