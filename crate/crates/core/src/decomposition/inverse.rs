use serde::Serialize;

use super::{positive_canonical_form, resolve_alpha, DecomposeOptions, PositiveCanonicalForm};
use crate::error::{OpError, Result};
use crate::kernels::{inverse, operator_norm, polar_decompose, svd};
use crate::matrix::{ComplexMatrix, C64};
use crate::operator::StructuredOperator;
use crate::section::Section;
use crate::spectrum::Dim;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseResult {
    pub alpha: f64,
    #[serde(skip)]
    pub t_inverse: ComplexMatrix,
    #[serde(skip)]
    pub k3: ComplexMatrix,
    /// `|T|^-1` from a direct inverse of the form.
    #[serde(skip)]
    pub modulus_inverse: ComplexMatrix,
    pub modulus_inverse_norm: f64,
    /// `|| |T|^-1 - (alpha^-1 I + K3) ||`.
    pub formula_defect: f64,
    /// `||T T^-1 - I||`.
    pub inverse_defect: f64,
    /// `||alpha I - K1 + K2 - |T| ||`.
    pub form_mismatch: f64,
    /// Singular values of K3, descending.
    pub k3_singular_values: Vec<f64>,
}

/// `T^-1 = (alpha^-1 I + K3) W*` with `K3 = alpha^-1 (K1 - K2)(alpha I - K1 + K2)^-1`.
pub fn invert_closure_an(t: &ComplexMatrix, form: &PositiveCanonicalForm, tol: &ToleranceConfig) -> Result<InverseResult> {
    if form.alpha == 0.0 {
        return Err(OpError::AlphaZero);
    }
    if t.rows() != form.dim || !t.is_square() {
        return Err(OpError::ShapeMismatch(format!("{}x{} operator with a form on C^{}", t.rows(), t.cols(), form.dim)));
    }
    let polar = polar_decompose(t, tol)?;
    if polar.null_dim > 0 {
        return Err(OpError::NotInvertible { min_modulus: 0.0 });
    }
    let m = form.reassemble();
    let modulus_inverse = inverse(&m)?;
    let a = form.alpha;
    let k3 = (&(&form.k1 - &form.k2) * &modulus_inverse).scale_real(1.0 / a);
    let approx = k3.shift_diag(C64::new(1.0 / a, 0.0));
    let t_inverse = &approx * &polar.w.adjoint();
    let n = t.rows();
    Ok(InverseResult {
        alpha: a,
        modulus_inverse_norm: operator_norm(&modulus_inverse)?,
        formula_defect: operator_norm(&(&modulus_inverse - &approx))?,
        inverse_defect: operator_norm(&(&(t * &t_inverse) - &ComplexMatrix::identity(n)))?,
        form_mismatch: operator_norm(&(&m - &polar.modulus))?,
        k3_singular_values: svd(&k3)?.sigma,
        t_inverse,
        k3,
        modulus_inverse,
    })
}

/// Inverse of the section of an invertible operator, with alpha resolved from its profile.
pub fn invert_closure_an_op(op: &StructuredOperator, n: usize, opts: &DecomposeOptions) -> Result<InverseResult> {
    let alpha = resolve_alpha(op, n, opts)?;
    if alpha.alpha == 0.0 {
        return Err(OpError::AlphaZero);
    }
    if let Some(p) = op.effective_profile() {
        let onto = p.kernel_dim == Dim::Finite(0) && p.cokernel_dim == Dim::Finite(0);
        if !onto || p.min_modulus <= opts.tol.rank_tol * p.norm.unwrap_or(1.0) {
            return Err(OpError::NotInvertible { min_modulus: p.min_modulus });
        }
    }
    let t = Section::new(op, n)?.t;
    let polar = polar_decompose(&t, &opts.tol)?;
    let form = positive_canonical_form(&polar.modulus, alpha.alpha, &opts.tol)?;
    invert_closure_an(&t, &form, &opts.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::catalog;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn twice_identity() {
        let t = ComplexMatrix::identity(4).scale_real(2.0);
        let f = positive_canonical_form(&t, 2.0, &tol()).unwrap();
        let r = invert_closure_an(&t, &f, &tol()).unwrap();
        assert!(r.k3.max_abs() < 1e-15);
        assert!((&r.t_inverse - &ComplexMatrix::identity(4).scale_real(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn rank_one_perturbation() {
        // |T| = I - K1 with K1 = e1 e1* / 2: K3 = e1 e1*, |T|^-1 = diag(2, 1, 1)
        let t = ComplexMatrix::from_real_diag(&[0.5, 1.0, 1.0]);
        let f = positive_canonical_form(&t, 1.0, &tol()).unwrap();
        let r = invert_closure_an(&t, &f, &tol()).unwrap();
        assert!((&r.k3 - &ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0])).max_abs() < 1e-15);
        assert!((&r.modulus_inverse - &ComplexMatrix::from_real_diag(&[2.0, 1.0, 1.0])).max_abs() < 1e-15);
        assert!(r.formula_defect < 1e-15);
    }

    #[test]
    fn errors() {
        let t = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let f = positive_canonical_form(&t, 1.0, &tol()).unwrap();
        assert!(matches!(invert_closure_an(&t, &f, &tol()), Err(OpError::NotInvertible { .. })));
        let f = positive_canonical_form(&t, 0.0, &tol()).unwrap();
        assert_eq!(invert_closure_an(&t, &f, &tol()), Err(OpError::AlphaZero));
        let o = DecomposeOptions::default();
        assert!(matches!(invert_closure_an_op(&catalog::hyponormal_example(), 32, &o), Err(OpError::NotInvertible { .. })));
        assert_eq!(invert_closure_an_op(&catalog::reciprocal_diagonal(), 32, &o), Err(OpError::AlphaZero));
    }
}
