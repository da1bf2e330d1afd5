use serde::{Deserialize, Serialize};

use super::{basis_of, cluster_descending, interior_basis, resolve_alpha, restricted_hermitian_norm, side_of, AlphaChoice, DecomposeOptions, Side};
use crate::classification::{interior_self_commutator, is_quasinormal_interior, symbolic, EvalMode};
use crate::error::{OpError, Result};
use crate::kernels::{hermitian_eig, hermitian_norm, operator_norm};
use crate::matrix::ComplexMatrix;
use crate::operator::StructuredOperator;
use crate::section::Section;
use crate::spectrum::Dim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometryKind {
    Unitary,
    ProperIsometry,
    Absent,
}

/// `scalar * U` on an eigenspace of |T|.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralBlock {
    pub scalar: f64,
    pub dim: usize,
    #[serde(skip)]
    pub basis: ComplexMatrix,
    #[serde(skip)]
    pub unitary: ComplexMatrix,
    /// `max(||U*U - I||, ||UU* - I||)`.
    pub unitarity_defect: f64,
    /// The eigenspace for 0, where the block is the identity on `N(T)`.
    pub kernel_block: bool,
}

/// `alpha * V` on the alpha-eigenspace of |T|.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssentialBlock {
    pub alpha: f64,
    pub dim: usize,
    #[serde(skip)]
    pub basis: ComplexMatrix,
    #[serde(skip)]
    pub v: ComplexMatrix,
    /// `||V*V - I||`, exact on the section.
    pub isometry_defect: f64,
    /// `||VV* - I||` on the interior part of the block.
    pub coisometry_defect: f64,
    pub interior_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasinormalDecomposition {
    pub n: usize,
    pub alpha: AlphaChoice,
    pub quasinormal_mode: EvalMode,
    pub quasinormal_defect: f64,
    pub upper_blocks: Vec<SpectralBlock>,
    pub essential_block: Option<EssentialBlock>,
    pub essential_kind: IsometryKind,
    pub lower_blocks: Vec<SpectralBlock>,
    pub norm: f64,
    pub reassembly_error: f64,
    /// Declared data says T must be normal (alpha not an eigenvalue, or a finite alpha-eigenspace).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_expected: Option<bool>,
    /// Interior self-commutator norm of the reassembled section.
    pub normal_defect: f64,
}

impl QuasinormalDecomposition {
    /// `sum scalar * Q U Q*` over all blocks.
    pub fn reassemble(&self) -> ComplexMatrix {
        let mut r = ComplexMatrix::zeros(self.n, self.n);
        for b in self.upper_blocks.iter().chain(&self.lower_blocks) {
            add_block(&mut r, &b.basis, &b.unitary, b.scalar);
        }
        if let Some(e) = &self.essential_block {
            add_block(&mut r, &e.basis, &e.v, e.alpha);
        }
        r
    }

    /// All block scalars in descending order.
    pub fn block_scalars(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.upper_blocks.iter().map(|b| b.scalar).collect();
        v.extend(self.essential_block.iter().map(|e| e.alpha));
        v.extend(self.lower_blocks.iter().map(|b| b.scalar));
        v
    }

    /// Only the essential block is present (`m(T) = alpha = ||T||`).
    pub fn is_single_essential_block(&self) -> bool {
        self.upper_blocks.is_empty() && self.lower_blocks.is_empty() && self.essential_block.is_some()
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.upper_blocks.iter().chain(&self.lower_blocks).map(|b| b.unitarity_defect).fold(0.0, f64::max)
    }
}

fn add_block(r: &mut ComplexMatrix, q: &ComplexMatrix, u: &ComplexMatrix, s: f64) {
    if q.cols() == 0 {
        return;
    }
    let part = &(&(q * u) * &q.adjoint()).scale_real(s);
    *r = &*r + part;
}

fn unitarity_defect(u: &ComplexMatrix) -> Result<f64> {
    let i = ComplexMatrix::identity(u.rows());
    let a = hermitian_norm(&(&(&u.adjoint() * u) - &i).hermitian_part())?;
    let b = hermitian_norm(&(&(u * &u.adjoint()) - &i).hermitian_part())?;
    Ok(a.max(b))
}

/// Spectral-block decomposition of a quasinormal operator with a single essential point of |T|.
pub fn quasinormal_decompose(op: &StructuredOperator, n: usize, opts: &DecomposeOptions) -> Result<QuasinormalDecomposition> {
    let tol = &opts.tol;
    let (quasinormal_mode, quasinormal_defect) = match symbolic::quasinormal(op) {
        Some(true) => (EvalMode::Symbolic, 0.0),
        _ => {
            let c = is_quasinormal_interior(op, n, tol)?;
            if !c.holds {
                return Err(OpError::NotQuasinormal { defect: c.defect });
            }
            (EvalMode::Interior, c.defect)
        }
    };
    let alpha = resolve_alpha(op, n, opts)?;
    let a = alpha.alpha;
    let section = Section::new(op, n)?;
    let keep = section.interior(tol)?;
    let g = section.gram();
    let e = hermitian_eig(&g, tol)?;
    let sv: Vec<f64> = e.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    let norm = sv.last().copied().unwrap_or(0.0);
    let zero_tol = tol.rank_tol * norm.max(a);

    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut essential = None;
    for grp in cluster_descending(&sv, tol.cluster_gap) {
        let q = basis_of(&e.vectors, &grp.idx);
        let x = section.t.compress(&q);
        let is_zero = grp.hi <= zero_tol.max(tol.cluster_gap);
        let side = if a == 0.0 && is_zero { Side::Lower } else { side_of(&grp, &alpha, tol.cluster_gap)? };
        if side == Side::Essential {
            let v = x.scale_real(1.0 / a);
            let vv = &g.compress(&q).scale_real(1.0 / (a * a)) - &ComplexMatrix::identity(q.cols());
            let isometry_defect = hermitian_norm(&vv.hermitian_part())?;
            let z = interior_basis(&q, keep);
            let co = &(&v * &v.adjoint()) - &ComplexMatrix::identity(q.cols());
            let coisometry_defect =
                if z.cols() > 0 { restricted_hermitian_norm(&z, &co)? } else { hermitian_norm(&co.hermitian_part())? };
            essential = Some(EssentialBlock {
                alpha: a,
                dim: q.cols(),
                basis: q,
                v,
                isometry_defect,
                coisometry_defect,
                interior_dim: z.cols(),
            });
            continue;
        }
        let (unitary, kernel_block) = if is_zero {
            (ComplexMatrix::identity(q.cols()), true)
        } else {
            (x.scale_real(1.0 / grp.center), false)
        };
        let block = SpectralBlock {
            scalar: if kernel_block { 0.0 } else { grp.center },
            dim: q.cols(),
            unitarity_defect: unitarity_defect(&unitary)?,
            basis: q,
            unitary,
            kernel_block,
        };
        match side {
            Side::Upper => upper.push(block),
            _ => lower.push(block),
        }
    }
    let essential_kind = match &essential {
        None => IsometryKind::Absent,
        Some(b) if b.coisometry_defect <= tol.eq_tol => IsometryKind::Unitary,
        Some(_) => IsometryKind::ProperIsometry,
    };
    let normal_expected = op
        .effective_profile()
        .map(|p| !p.alpha_in_point_spectrum || matches!(p.alpha_eigenspace_dim, Dim::Finite(_)));
    let mut out = QuasinormalDecomposition {
        n,
        alpha,
        quasinormal_mode,
        quasinormal_defect,
        upper_blocks: upper,
        essential_block: essential,
        essential_kind,
        lower_blocks: lower,
        norm,
        reassembly_error: 0.0,
        normal_expected,
        normal_defect: 0.0,
    };
    let r = out.reassemble();
    out.reassembly_error = operator_norm(&(&r - &section.t))?;
    out.normal_defect = hermitian_norm(&interior_self_commutator(&r, keep)?)?;
    Ok(out)
}
