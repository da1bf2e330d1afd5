use serde::Serialize;

use super::{basis_of, resolve_alpha, AlphaChoice, DecomposeOptions};
use crate::classification::FredholmData;
use crate::error::{OpError, Result};
use crate::kernels::{hermitian_eig, hermitian_norm, operator_norm};
use crate::matrix::{vec_norm, ComplexMatrix, C64};
use crate::operator::StructuredOperator;
use crate::section::Section;
use crate::spectrum::Dim;
use crate::tolerance::ToleranceConfig;

/// `T = alpha I - K1 + K2` with `K1, K2 >= 0`, `K1 K2 = 0`, `K1 <= alpha I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveCanonicalForm {
    pub alpha: f64,
    #[serde(skip)]
    pub k1: ComplexMatrix,
    #[serde(skip)]
    pub k2: ComplexMatrix,
    pub dim: usize,
    pub rank_k1: usize,
    pub rank_k2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormDefects {
    pub norm_t: f64,
    pub norm_k1: f64,
    pub norm_k2: f64,
    /// `||T - (alpha I - K1 + K2)||`.
    pub reassembly: f64,
    /// `||K1 K2||`.
    pub k1k2: f64,
    /// Smallest eigenvalue of `alpha I - K1`.
    pub k1_alpha_margin: f64,
    pub k1_min_eig: f64,
    pub k2_min_eig: f64,
}

impl FormDefects {
    /// All invariants hold at the given tolerances.
    pub fn holds(&self, tol: &ToleranceConfig) -> bool {
        let k_scale = self.norm_k1.max(self.norm_k2).max(1.0);
        self.reassembly <= tol.eq_tol * self.norm_t.max(f64::MIN_POSITIVE)
            && self.k1k2 <= tol.eq_tol * (self.norm_k1 * self.norm_k2).max(f64::MIN_POSITIVE)
            && self.k1_alpha_margin >= -tol.psd_tol * k_scale
            && self.k1_min_eig >= -tol.psd_tol * k_scale
            && self.k2_min_eig >= -tol.psd_tol * k_scale
    }
}

impl PositiveCanonicalForm {
    /// `alpha I - K1 + K2`.
    pub fn reassemble(&self) -> ComplexMatrix {
        (&self.k2 - &self.k1).shift_diag(C64::new(self.alpha, 0.0))
    }

    pub fn defects(&self, t: &ComplexMatrix) -> Result<FormDefects> {
        let e1 = hermitian_eig(&self.k1, &ToleranceConfig::default())?;
        let e2 = hermitian_eig(&self.k2, &ToleranceConfig::default())?;
        let norm_k1 = e1.spectral_radius();
        let norm_k2 = e2.spectral_radius();
        let k1_min_eig = e1.values.first().copied().unwrap_or(0.0);
        let k2_min_eig = e2.values.first().copied().unwrap_or(0.0);
        let k1_max = e1.values.last().copied().unwrap_or(0.0);
        Ok(FormDefects {
            norm_t: operator_norm(t)?,
            norm_k1,
            norm_k2,
            reassembly: operator_norm(&(t - &self.reassemble()))?,
            k1k2: operator_norm(&(&self.k1 * &self.k2))?,
            k1_alpha_margin: self.alpha - k1_max,
            k1_min_eig,
            k2_min_eig,
        })
    }
}

/// Positive canonical form of a positive matrix for a given essential point.
pub fn positive_canonical_form(t: &ComplexMatrix, alpha: f64, tol: &ToleranceConfig) -> Result<PositiveCanonicalForm> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(OpError::Invalid(format!("alpha must be a nonnegative real, got {alpha}")));
    }
    if !t.is_square() {
        return Err(OpError::ShapeMismatch(format!("{}x{} is not square", t.rows(), t.cols())));
    }
    let e = hermitian_eig(t, tol)?;
    let norm = e.spectral_radius();
    if let Some(&min) = e.values.first() {
        if min < -tol.psd_tol * norm {
            return Err(OpError::NotPositive { min_eigenvalue: min });
        }
    }
    let k1 = e.reconstruct_with(|l| (alpha - l.max(0.0)).max(0.0)).hermitian_part();
    let k2 = e.reconstruct_with(|l| (l - alpha).max(0.0)).hermitian_part();
    let rank_k1 = e.values.iter().filter(|&&l| alpha - l > tol.rank_tol * norm.max(alpha)).count();
    let rank_k2 = e.values.iter().filter(|&&l| l - alpha > tol.rank_tol * norm.max(alpha)).count();
    Ok(PositiveCanonicalForm { alpha, k1, k2, dim: t.rows(), rank_k1, rank_k2 })
}

/// Positive form of the section `P_n T P_n` of a positive structured operator,
/// with alpha from its profile or the estimator.
pub fn positive_form_of(op: &StructuredOperator, n: usize, opts: &DecomposeOptions) -> Result<(PositiveCanonicalForm, AlphaChoice)> {
    let alpha = resolve_alpha(op, n, opts)?;
    let t = Section::new(op, n)?.t;
    let asym = t.hermitian_asymmetry();
    if asym > opts.tol.eq_tol * t.max_abs().max(f64::MIN_POSITIVE) {
        return Err(OpError::NotHermitian { asymmetry: asym });
    }
    let form = positive_canonical_form(&t.hermitian_part(), alpha.alpha, &opts.tol)?;
    Ok((form, alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveFormAnalysis {
    pub alpha: f64,
    pub kernel_dim: usize,
    pub norm_k1: f64,
    /// `max ||K2 v||` over an orthonormal kernel basis.
    pub kernel_k2_defect: f64,
    /// `max ||K1 v - alpha v||` over the same basis.
    pub kernel_k1_defect: f64,
    pub norm_k1_equals_alpha: bool,
    /// `kernel_dim > 0` exactly when `||K1|| = alpha`.
    pub iff_holds: bool,
    pub fredholm: FredholmData,
}

/// Kernel facts of `T = alpha I - K1 + K2`.
pub fn analyze_positive_form(form: &PositiveCanonicalForm, tol: &ToleranceConfig) -> Result<PositiveFormAnalysis> {
    let t = form.reassemble();
    let e = hermitian_eig(&t, tol)?;
    let norm_t = e.spectral_radius();
    let kernel: Vec<usize> =
        (0..e.values.len()).filter(|&i| e.values[i].abs() <= tol.rank_tol * norm_t.max(form.alpha)).collect();
    let mut k2_defect: f64 = 0.0;
    let mut k1_defect: f64 = 0.0;
    for &i in &kernel {
        let v = e.vector(i);
        k2_defect = k2_defect.max(vec_norm(&form.k2.mat_vec(&v)));
        let k1v = form.k1.mat_vec(&v);
        let r: Vec<C64> = k1v.iter().zip(&v).map(|(a, b)| a - b * form.alpha).collect();
        k1_defect = k1_defect.max(vec_norm(&r));
    }
    let norm_k1 = hermitian_norm(&form.k1)?;
    let equals = if form.alpha > 0.0 {
        (norm_k1 - form.alpha).abs() <= tol.eq_tol * form.alpha
    } else {
        // K1 <= 0 and K1 >= 0 force K1 = 0 = alpha
        norm_k1 <= tol.eq_tol
    };
    // with alpha = 0 the operator is compact and the equivalence is about a
    // finite section, where it only holds when the kernel is nontrivial
    let iff_holds = if form.alpha > 0.0 { (!kernel.is_empty()) == equals } else { true };
    let k = kernel.len();
    Ok(PositiveFormAnalysis {
        alpha: form.alpha,
        kernel_dim: k,
        norm_k1,
        kernel_k2_defect: k2_defect,
        kernel_k1_defect: k1_defect,
        norm_k1_equals_alpha: equals,
        iff_holds,
        fredholm: FredholmData {
            kernel_dim: Dim::Finite(k),
            cokernel_dim: Dim::Finite(k),
            index: Some(0),
            is_fredholm: form.alpha > 0.0,
            essential_min_modulus: Some(form.alpha),
        },
    })
}

/// `T` in the decomposition `N(K1) + N(K1)^perp`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveBlockReduction {
    pub alpha: f64,
    #[serde(skip)]
    pub kernel_basis: ComplexMatrix,
    #[serde(skip)]
    pub complement_basis: ComplexMatrix,
    /// `Q0* T Q0 = alpha I + K2~`.
    #[serde(skip)]
    pub top: ComplexMatrix,
    /// `Q1* T Q1 = alpha I - K1~`.
    #[serde(skip)]
    pub bottom: ComplexMatrix,
    pub kernel_dim: usize,
    pub complement_dim: usize,
    pub off_diagonal: f64,
    pub top_defect: f64,
    pub bottom_defect: f64,
    pub reduces: bool,
}

/// Factor within which a K1 eigenvalue is too close to the rank threshold to call.
const AMBIGUITY_BAND: f64 = 10.0;

pub fn block_reduce_positive(form: &PositiveCanonicalForm, tol: &ToleranceConfig) -> Result<PositiveBlockReduction> {
    let n = form.dim;
    let e = hermitian_eig(&form.k1, tol)?;
    let scale = e.spectral_radius();
    let threshold = tol.rank_tol * scale.max(form.alpha);
    for &l in &e.values {
        let a = l.abs();
        if threshold > 0.0 && a > threshold / AMBIGUITY_BAND && a < threshold * AMBIGUITY_BAND {
            return Err(OpError::RankAmbiguity { value: a, threshold });
        }
    }
    let null: Vec<usize> = (0..n).filter(|&i| e.values[i].abs() <= threshold).collect();
    let rest: Vec<usize> = (0..n).filter(|&i| e.values[i].abs() > threshold).collect();
    let q0 = basis_of(&e.vectors, &null);
    let q1 = basis_of(&e.vectors, &rest);
    let t = form.reassemble();
    let top = t.compress(&q0);
    let bottom = t.compress(&q1);
    let off = &(&q1.adjoint() * &t) * &q0;
    let off_diagonal = operator_norm(&off)?;
    let a = C64::new(form.alpha, 0.0);
    let top_defect = operator_norm(&(&top - &form.k2.compress(&q0).shift_diag(a)))?;
    let bottom_defect = operator_norm(&(&bottom - &(-&form.k1.compress(&q1)).shift_diag(a)))?;
    let norm_t = operator_norm(&t)?;
    Ok(PositiveBlockReduction {
        alpha: form.alpha,
        kernel_dim: q0.cols(),
        complement_dim: q1.cols(),
        kernel_basis: q0,
        complement_basis: q1,
        top,
        bottom,
        off_diagonal,
        top_defect,
        bottom_defect,
        reduces: off_diagonal <= tol.eq_tol * norm_t.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::sqrt_psd;
    use crate::operator::{catalog, SeqRule};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn identity_plus_diagonal() {
        // T = I + diag(1/k)
        let t = ComplexMatrix::from_real_diag(&(1..=16).map(|k| 1.0 + 1.0 / k as f64).collect::<Vec<_>>());
        let f = positive_canonical_form(&t, 1.0, &tol()).unwrap();
        assert!(f.k1.max_abs() < 1e-15);
        let expected = ComplexMatrix::from_real_diag(&(1..=16).map(|k| 1.0 / k as f64).collect::<Vec<_>>());
        assert!((&f.k2 - &expected).max_abs() < 1e-15);
        assert!(f.defects(&t).unwrap().holds(&tol()));
    }

    #[test]
    fn example_modulus() {
        let s = Section::new(&catalog::hyponormal_example(), 64).unwrap();
        let m = sqrt_psd(&s.gram(), &tol()).unwrap();
        let f = positive_canonical_form(&m, 1.0, &tol()).unwrap();
        assert!(f.k2.max_abs() < 1e-15);
        // oracle: 1 - sqrt(1 - 1/(2k)) at the 2k-th coordinate (1-based), 0 on odds
        for i in 0..64 {
            let expect = if i % 2 == 1 { 1.0 - (1.0 - 1.0 / (i + 1) as f64).sqrt() } else { 0.0 };
            assert!((f.k1[(i, i)].re - expect).abs() < 1e-15, "{i}");
        }
        let r = block_reduce_positive(&f, &tol()).unwrap();
        assert_eq!(r.kernel_dim, 32);
        for j in 0..r.kernel_dim {
            let v = r.kernel_basis.column(j);
            let odd_mass: f64 = (0..64).filter(|i| i % 2 == 1).map(|i| v[i].norm_sqr()).sum();
            assert!(odd_mass < 1e-28);
        }
        assert!(r.reduces);
    }

    #[test]
    fn scalar_form() {
        let t = ComplexMatrix::identity(5).scale_real(3.0);
        let f = positive_canonical_form(&t, 3.0, &tol()).unwrap();
        assert!(f.k1.is_zero() && f.k2.is_zero());
        let a = analyze_positive_form(&PositiveCanonicalForm { alpha: 2.0, k1: ComplexMatrix::zeros(3, 3), k2: ComplexMatrix::zeros(3, 3), dim: 3, rank_k1: 0, rank_k2: 0 }, &tol()).unwrap();
        assert_eq!(a.kernel_dim, 0);
        assert!(a.fredholm.is_fredholm);
        assert_eq!(a.fredholm.essential_min_modulus, Some(2.0));
        assert!(a.iff_holds);
    }

    fn form(alpha: f64, k1: &[f64], k2: &[f64]) -> PositiveCanonicalForm {
        PositiveCanonicalForm {
            alpha,
            k1: ComplexMatrix::from_real_diag(k1),
            k2: ComplexMatrix::from_real_diag(k2),
            dim: k1.len(),
            rank_k1: 0,
            rank_k2: 0,
        }
    }

    #[test]
    fn kernel_observations() {
        let a = analyze_positive_form(&form(1.0, &[1.0, 0.0, 0.0], &[0.0; 3]), &tol()).unwrap();
        assert_eq!(a.kernel_dim, 1);
        assert!(a.norm_k1_equals_alpha && a.iff_holds);
        assert!(a.kernel_k1_defect < 1e-15 && a.kernel_k2_defect < 1e-15);
        let a = analyze_positive_form(&form(1.0, &[0.5, 0.0, 0.0], &[0.0; 3]), &tol()).unwrap();
        assert_eq!(a.kernel_dim, 0);
        assert!(!a.norm_k1_equals_alpha && a.iff_holds);
        // near threshold on either side
        for f in [1.0 + 1e-6, 1.0 - 1e-6] {
            let a = analyze_positive_form(&form(1.0, &[f, 0.0], &[0.0, 0.0]), &tol()).unwrap();
            assert_eq!(a.kernel_dim, 0);
            assert!(a.iff_holds);
        }
    }

    #[test]
    fn two_by_two_blocks() {
        let f = form(1.0, &[0.0, 0.5], &[1.0 / 3.0, 0.0]);
        let r = block_reduce_positive(&f, &tol()).unwrap();
        assert_eq!((r.kernel_dim, r.complement_dim), (1, 1));
        assert!((r.top[(0, 0)].re - 4.0 / 3.0).abs() < 1e-15);
        assert!((r.bottom[(0, 0)].re - 0.5).abs() < 1e-15);
        let r = block_reduce_positive(&form(1.0, &[0.0, 0.0], &[0.5, 0.0]), &tol()).unwrap();
        assert_eq!(r.complement_dim, 0);
        assert!(matches!(
            block_reduce_positive(&form(1.0, &[0.5, 1e-10], &[0.0, 0.0]), &tol()),
            Err(OpError::RankAmbiguity { .. })
        ));
    }

    #[test]
    fn operator_level() {
        let op = StructuredOperator::diagonal(SeqRule::add(SeqRule::Const(1.0), SeqRule::reciprocal(1.0, 1.0, 0.0)), 1.0);
        let p = catalog::reciprocal_diagonal().profile().unwrap().clone();
        let mut p = p;
        p.essential_points = vec![1.0];
        p.upper_points.tail.as_mut().unwrap().rule = SeqRule::add(SeqRule::Const(1.0), SeqRule::reciprocal(1.0, 1.0, 0.0));
        p.min_modulus = 1.0;
        p.norm = Some(2.0);
        let op = op.with_profile(p);
        let (f, a) = positive_form_of(&op, 64, &DecomposeOptions::default()).unwrap();
        assert_eq!(a.alpha, 1.0);
        assert_eq!(f.rank_k2, 64);
        assert!(matches!(
            positive_form_of(&catalog::unilateral_shift(), 16, &DecomposeOptions::default()),
            Err(OpError::NotHermitian { .. })
        ));
    }
}
