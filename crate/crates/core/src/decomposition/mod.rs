//! Canonical forms: the positive form `alpha I - K1 + K2`, its block reduction,
//! quasinormal spectral blocks, the hyponormal 3x3 block form, its adjoint and
//! the inverse formula for invertible closure-AN operators.
//!
//! Spectral subspaces come from the exact gram `P_n T*T P_n` of a section.
//! Identities that involve products of blocks are measured on the part of each
//! subspace supported on interior coordinates, where truncation has no effect.

mod export;
mod hyponormal;
mod inverse;
mod positive;
mod quasinormal;

pub use export::{matrix_csv, write_matrix_csv};
pub use hyponormal::{
    adjoint_block_form, hyponormal_block_form, normality_from_blocks, AdjointBlockForm, AdjointDefects, BlockNormality,
    HyponormalBlockForm, HyponormalDefects,
};
pub use inverse::{invert_closure_an, invert_closure_an_op, InverseResult};
pub use positive::{
    analyze_positive_form, block_reduce_positive, positive_canonical_form, positive_form_of, FormDefects,
    PositiveBlockReduction, PositiveCanonicalForm, PositiveFormAnalysis,
};
pub use quasinormal::{quasinormal_decompose, EssentialBlock, IsometryKind, QuasinormalDecomposition, SpectralBlock};

use serde::{Deserialize, Serialize};

use crate::classification::estimate_unchecked;
use crate::error::{OpError, Result};
use crate::exec::Mode;
use crate::kernels::{complete_orthonormal, hermitian_norm, operator_norm};
use crate::matrix::{inner, vec_norm, ComplexMatrix, C64};
use crate::operator::StructuredOperator;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOptions {
    pub tol: ToleranceConfig,
    /// Compare a declared alpha against the estimator when both are available.
    pub cross_check: bool,
    #[serde(skip)]
    pub exec: Mode,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { tol: ToleranceConfig::default(), cross_check: true, exec: Mode::Auto }
    }
}

impl DecomposeOptions {
    pub fn with_tol(tol: ToleranceConfig) -> Self {
        Self { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSource {
    Declared,
    Estimated,
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub source: AlphaSource,
    /// Whether alpha is treated as an eigenvalue of |T|.
    pub in_point_spectrum: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
}

/// Smallest section used by the estimator when cross-checking alpha.
const MIN_ESTIMATE_DIM: usize = 16;

/// Essential point of |T|: declared profile first, estimator second; a
/// disagreement between the two is an error. The estimator runs on the
/// sections `n/4, n/2, n`.
pub fn resolve_alpha(op: &StructuredOperator, n: usize, opts: &DecomposeOptions) -> Result<AlphaChoice> {
    let profile = op.effective_profile();
    if let Some(p) = &profile {
        if p.finite_dimension.is_some() {
            return Ok(AlphaChoice { alpha: 0.0, source: AlphaSource::Declared, in_point_spectrum: false, estimate: None });
        }
        if p.essential_points.len() > 1 {
            return Err(OpError::NoEssentialPoint(format!(
                "declared essential spectrum {:?} is not a single point",
                p.essential_points
            )));
        }
    }
    let declared = profile.as_ref().and_then(|p| p.alpha());
    let estimate = if (declared.is_none() || opts.cross_check) && n / 4 >= MIN_ESTIMATE_DIM && !op.is_finite_dimensional() {
        let dims = [n / 4, n / 2, n];
        let est = estimate_unchecked(op, &dims, &opts.tol, opts.exec)?;
        let points = est.modulus_points();
        match points.as_slice() {
            [c] => Some((c.center, c.uncertainty)),
            _ => None,
        }
    } else {
        None
    };
    match (declared, estimate) {
        (Some(d), Some((e, u))) => {
            if (d - e).abs() > opts.tol.cluster_gap.max(u) {
                return Err(OpError::Inconsistent(format!("declared alpha {d} but the estimator finds {e} (+/- {u})")));
            }
            let p = profile.as_ref().expect("declared alpha comes from a profile");
            Ok(AlphaChoice { alpha: d, source: AlphaSource::Declared, in_point_spectrum: p.alpha_in_point_spectrum, estimate: Some(e) })
        }
        (Some(d), None) => {
            let p = profile.as_ref().expect("declared alpha comes from a profile");
            Ok(AlphaChoice { alpha: d, source: AlphaSource::Declared, in_point_spectrum: p.alpha_in_point_spectrum, estimate: None })
        }
        (None, Some((e, _))) => Ok(AlphaChoice { alpha: e, source: AlphaSource::Estimated, in_point_spectrum: true, estimate: Some(e) }),
        (None, None) => Err(OpError::NoEssentialPoint("no declared profile and the estimator is inconclusive".into())),
    }
}

/// Eigenvalues grouped by chains of gaps `<= gap`, in descending order.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Group {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    pub idx: Vec<usize>,
}

/// `values` ascending (as returned by the eigensolver).
pub(crate) fn cluster_descending(values: &[f64], gap: f64) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for i in (0..values.len()).rev() {
        let v = values[i];
        match groups.last_mut() {
            Some(g) if g.lo - v <= gap => {
                g.lo = v;
                g.idx.push(i);
            }
            _ => groups.push(Group { center: v, lo: v, hi: v, idx: vec![i] }),
        }
    }
    for g in &mut groups {
        g.idx.reverse();
        g.center = g.idx.iter().map(|&i| values[i]).sum::<f64>() / g.idx.len() as f64;
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Upper,
    Essential,
    Lower,
}

pub(crate) fn side_of(g: &Group, alpha: &AlphaChoice, gap: f64) -> Result<Side> {
    let a = alpha.alpha;
    if g.hi < a - gap {
        return Ok(Side::Lower);
    }
    if g.lo > a + gap {
        return Ok(Side::Upper);
    }
    if alpha.in_point_spectrum || g.lo == a || g.hi == a {
        return Ok(Side::Essential);
    }
    if g.lo < a && g.hi > a {
        return Err(OpError::EssentialAmbiguity(format!(
            "cluster [{}, {}] straddles alpha = {a}, which is not declared as an eigenvalue",
            g.lo, g.hi
        )));
    }
    Ok(if g.center > a { Side::Upper } else { Side::Lower })
}

/// Columns `idx` of `vectors`.
pub(crate) fn basis_of(vectors: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    let cols: Vec<Vec<C64>> = idx.iter().map(|&i| vectors.column(i)).collect();
    ComplexMatrix::from_columns(vectors.rows(), &cols)
}

pub(crate) fn concat_columns(parts: &[&ComplexMatrix], rows: usize) -> ComplexMatrix {
    let cols: Vec<Vec<C64>> = parts.iter().flat_map(|p| (0..p.cols()).map(|j| p.column(j))).collect();
    ComplexMatrix::from_columns(rows, &cols)
}

/// Orthonormal basis, in the coordinates of `q`'s columns, of the vectors in
/// span(q) that vanish on the boundary coordinates `keep..`.
pub fn interior_basis(q: &ComplexMatrix, keep: usize) -> ComplexMatrix {
    let d = q.cols();
    let mut rowspace: Vec<Vec<C64>> = Vec::new();
    for i in keep.min(q.rows())..q.rows() {
        let mut v: Vec<C64> = q.row(i).iter().map(|z| z.conj()).collect();
        let start = vec_norm(&v);
        if start == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for c in &rowspace {
                let p = inner(c, &v);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= p * y;
                }
            }
        }
        let nrm = vec_norm(&v);
        if nrm > 1e-10 * start {
            v.iter_mut().for_each(|x| *x /= nrm);
            rowspace.push(v);
        }
    }
    let r = rowspace.len();
    let full = complete_orthonormal(rowspace, d);
    ComplexMatrix::from_columns(d, &full[r..])
}

/// `Z_r* X Z_c`.
pub(crate) fn restrict(z_rows: &ComplexMatrix, x: &ComplexMatrix, z_cols: &ComplexMatrix) -> ComplexMatrix {
    &(&z_rows.adjoint() * x) * z_cols
}

pub(crate) fn restricted_norm(z_rows: &ComplexMatrix, x: &ComplexMatrix, z_cols: &ComplexMatrix) -> Result<f64> {
    operator_norm(&restrict(z_rows, x, z_cols))
}

pub(crate) fn restricted_hermitian_norm(z: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    hermitian_norm(&restrict(z, h, z).hermitian_part())
}

/// `max |B*B - I|` entrywise deviation of a column set from orthonormality.
pub fn orthonormality_defect(q: &ComplexMatrix) -> f64 {
    let g = &q.adjoint() * q;
    (&g - &ComplexMatrix::identity(q.cols())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::catalog;

    #[test]
    fn clustering_is_descending() {
        let g = cluster_descending(&[0.1, 0.5, 0.5 + 1e-9, 2.0], 1e-6);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].idx, vec![3]);
        assert_eq!(g[1].idx, vec![1, 2]);
        assert_eq!(g[2].idx, vec![0]);
    }

    #[test]
    fn interior_basis_of_coordinates() {
        // span{e0, e2, e4} in C^5 with boundary {3, 4}: interior part is span{e0, e2}
        let q = ComplexMatrix::from_fn(5, 3, |i, j| if i == 2 * j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let z = interior_basis(&q, 3);
        assert_eq!(z.cols(), 2);
        let ambient = &q * &z;
        for j in 0..2 {
            assert_eq!(ambient[(3, j)].norm() + ambient[(4, j)].norm(), 0.0);
        }
    }

    #[test]
    fn alpha_precedence() {
        let opts = DecomposeOptions::default();
        let a = resolve_alpha(&catalog::hyponormal_example(), 256, &opts).unwrap();
        assert_eq!(a.alpha, 1.0);
        assert_eq!(a.source, AlphaSource::Declared);
        let est = a.estimate.unwrap();
        assert!((est - 1.0).abs() < 1e-3, "{est}");
        let bare = catalog::unilateral_shift().without_profile();
        let a = resolve_alpha(&bare, 64, &opts).unwrap();
        assert_eq!(a.source, AlphaSource::Estimated);
        assert!((a.alpha - 1.0).abs() < 1e-12);
        // a wrong declaration is caught
        let mut p = catalog::unilateral_shift().profile().unwrap().clone();
        p.essential_points = vec![2.0];
        p.min_modulus = 2.0;
        let lying = catalog::unilateral_shift().with_profile(p);
        assert!(matches!(resolve_alpha(&lying, 64, &opts), Err(OpError::Inconsistent(_))));
    }
}
