use serde::Serialize;

use super::{
    basis_of, cluster_descending, concat_columns, interior_basis, orthonormality_defect, resolve_alpha, restrict, restricted_hermitian_norm,
    restricted_norm, side_of, AlphaChoice, DecomposeOptions, Side,
};
use crate::classification::{interior_self_commutator, is_hyponormal_interior, symbolic, EvalMode};
use crate::error::{OpError, Result};
use crate::kernels::{cogram, gram, hermitian_eig, hermitian_eigvals, hermitian_norm, operator_norm};
use crate::matrix::ComplexMatrix;
use crate::operator::StructuredOperator;
use crate::section::Section;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyponormalDefects {
    /// `||V1* A||`.
    pub v1_star_a: f64,
    /// `||A*A + B*B - diag(beta^2)||`.
    pub gram_identity: f64,
    /// Smallest eigenvalue of `diag(beta^2) - BB*`.
    pub bb_margin: f64,
    /// `||BB* - diag(beta^2)||`, reported only.
    pub bb_equality: f64,
    pub v0_normal: f64,
    /// `||V1*V1 - I||`.
    pub v1_isometry: f64,
    /// `||V1 V1* - I||`.
    pub v1_coisometry: f64,
    /// `||B*B - BB*||`.
    pub b_normal: f64,
    /// Off-pattern blocks `(name, norm)`.
    pub leaks: Vec<(String, f64)>,
    /// `||T_n - block reassembly||` on the whole section.
    pub reassembly: f64,
    pub orthogonality: f64,
}

impl HyponormalDefects {
    pub fn max_leak(&self) -> f64 {
        self.leaks.iter().map(|l| l.1).fold(0.0, f64::max)
    }
}

/// `T = [[V0, 0, 0], [0, alpha V1, A], [0, 0, B]]` over `H0 + H1 + H2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyponormalBlockForm {
    pub n: usize,
    pub alpha: AlphaChoice,
    pub premise_mode: EvalMode,
    pub premise_defect: f64,
    pub norm: f64,
    /// `(dim H0, dim H1, dim H2)`.
    pub dims: [usize; 3],
    pub upper_scalars: Vec<(f64, usize)>,
    pub beta_targets: Vec<(f64, usize)>,
    /// Target beta for each H2 basis vector.
    pub beta_diag: Vec<f64>,
    #[serde(skip)]
    pub h0_basis: ComplexMatrix,
    #[serde(skip)]
    pub h1_basis: ComplexMatrix,
    #[serde(skip)]
    pub h2_basis: ComplexMatrix,
    #[serde(skip)]
    pub v0: ComplexMatrix,
    #[serde(skip)]
    pub v1: ComplexMatrix,
    #[serde(skip)]
    pub a: ComplexMatrix,
    #[serde(skip)]
    pub b: ComplexMatrix,
    /// Interior parts of H1 and H2 in block coordinates.
    #[serde(skip)]
    pub z1: ComplexMatrix,
    #[serde(skip)]
    pub z2: ComplexMatrix,
    pub interior: usize,
    pub defects: HyponormalDefects,
    /// Interior self-commutator norm of `T_n`, for cross-checks.
    pub t_normal_defect: f64,
}

impl HyponormalBlockForm {
    /// Invariants at the given tolerances.
    pub fn holds(&self, tol: &ToleranceConfig) -> bool {
        let s = self.norm.max(f64::MIN_POSITIVE);
        let d = &self.defects;
        d.v1_star_a <= tol.eq_tol * s
            && d.gram_identity <= tol.eq_tol * s * s
            && d.bb_margin >= -tol.psd_tol * s * s
            && d.v0_normal <= tol.eq_tol * s * s
            && d.reassembly <= tol.eq_tol * s
            && d.orthogonality <= 1e-12
    }

    /// `V0 + alpha V1 + A + B` placed back in section coordinates.
    pub fn reassemble(&self) -> ComplexMatrix {
        let q = [&self.h0_basis, &self.h1_basis, &self.h2_basis];
        let mut r = ComplexMatrix::zeros(self.n, self.n);
        let parts = [(0, 0, self.v0.clone()), (1, 1, self.v1.scale_real(self.alpha.alpha)), (1, 2, self.a.clone()), (2, 2, self.b.clone())];
        for (i, j, x) in parts {
            if q[i].cols() > 0 && q[j].cols() > 0 {
                r = &r + &(&(q[i] * &x) * &q[j].adjoint());
            }
        }
        r
    }

    fn beta_squared(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.beta_diag.iter().map(|b| b * b).collect::<Vec<_>>())
    }
}

fn premise(op: &StructuredOperator, n: usize, tol: &ToleranceConfig) -> Result<(EvalMode, f64)> {
    if symbolic::hyponormal(op) == Some(true) {
        return Ok((EvalMode::Symbolic, 0.0));
    }
    let c = is_hyponormal_interior(op, n, tol)?;
    if !c.holds {
        return Err(OpError::NotHyponormal { defect: c.defect });
    }
    Ok((EvalMode::Interior, c.defect))
}

fn min_eig(h: &ComplexMatrix) -> Result<f64> {
    if h.rows() == 0 {
        return Ok(0.0);
    }
    Ok(hermitian_eigvals(&h.hermitian_part())?[0])
}

/// 3x3 block form of a hyponormal operator whose |T| has a single essential point.
pub fn hyponormal_block_form(op: &StructuredOperator, n: usize, opts: &DecomposeOptions) -> Result<HyponormalBlockForm> {
    let tol = &opts.tol;
    let (premise_mode, premise_defect) = premise(op, n, tol)?;
    let alpha = resolve_alpha(op, n, opts)?;
    let a = alpha.alpha;
    let section = Section::new(op, n)?;
    let keep = section.interior(tol)?;
    let g = section.gram();
    let e = hermitian_eig(&g, tol)?;
    let sv: Vec<f64> = e.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    let norm = sv.last().copied().unwrap_or(0.0);

    let (mut i0, mut i1, mut i2) = (Vec::new(), Vec::new(), Vec::new());
    let (mut upper_scalars, mut beta_targets, mut beta_diag) = (Vec::new(), Vec::new(), Vec::new());
    for grp in cluster_descending(&sv, tol.cluster_gap) {
        let side = if a == 0.0 && grp.hi <= tol.cluster_gap { Side::Lower } else { side_of(&grp, &alpha, tol.cluster_gap)? };
        match side {
            Side::Upper => {
                upper_scalars.push((grp.center, grp.idx.len()));
                i0.extend(grp.idx);
            }
            Side::Essential => i1.extend(grp.idx),
            Side::Lower => {
                beta_targets.push((grp.center, grp.idx.len()));
                beta_diag.extend(std::iter::repeat_n(grp.center, grp.idx.len()));
                i2.extend(grp.idx);
            }
        }
    }
    let q = [basis_of(&e.vectors, &i0), basis_of(&e.vectors, &i1), basis_of(&e.vectors, &i2)];
    let t = &section.t;
    let block = |i: usize, j: usize| -> ComplexMatrix { &(&q[i].adjoint() * t) * &q[j] };
    let v0 = block(0, 0);
    let v1 = if a > 0.0 { block(1, 1).scale_real(1.0 / a) } else { ComplexMatrix::zeros(q[1].cols(), q[1].cols()) };
    let ablk = block(1, 2);
    let b = block(2, 2);
    let z: Vec<ComplexMatrix> = q.iter().map(|qi| interior_basis(qi, keep)).collect();

    let scale = norm.max(f64::MIN_POSITIVE);
    let mut leaks = Vec::new();
    for (i, j, name) in [(1, 0, "H0->H1"), (2, 0, "H0->H2"), (2, 1, "H1->H2"), (0, 1, "H1->H0"), (0, 2, "H2->H0")] {
        let x = block(i, j);
        let norm_ij = if x.rows() == 0 || x.cols() == 0 { 0.0 } else { restricted_norm(&z[i], &x, &z[j])? };
        if norm_ij > tol.eq_tol * scale {
            return Err(OpError::BlockLeak { block: name.to_string(), norm: norm_ij });
        }
        leaks.push((name.to_string(), norm_ij));
    }

    let beta2 = ComplexMatrix::from_real_diag(&beta_diag.iter().map(|b| b * b).collect::<Vec<_>>());
    let v1a = &v1.adjoint() * &ablk;
    let gram_id = &(&gram(&ablk) + &gram(&b)) - &beta2;
    let bb = &beta2 - &cogram(&b);
    let v1_iso = if a > 0.0 {
        let d = &g.compress(&q[1]).scale_real(1.0 / (a * a)) - &ComplexMatrix::identity(q[1].cols());
        hermitian_norm(&d.hermitian_part())?
    } else {
        0.0
    };
    let co = &cogram(&v1) - &ComplexMatrix::identity(v1.rows());
    let bn = &gram(&b) - &cogram(&b);
    let defects = HyponormalDefects {
        v1_star_a: if v1a.rows() == 0 || v1a.cols() == 0 { 0.0 } else { restricted_norm(&z[1], &v1a, &z[2])? },
        gram_identity: restricted_hermitian_norm(&z[2], &gram_id)?,
        bb_margin: min_eig(&restrict(&z[2], &bb, &z[2]))?,
        bb_equality: restricted_hermitian_norm(&z[2], &bb)?,
        v0_normal: hermitian_norm(&(&gram(&v0) - &cogram(&v0)))?,
        v1_isometry: v1_iso,
        v1_coisometry: if a > 0.0 { restricted_hermitian_norm(&z[1], &co)? } else { 0.0 },
        b_normal: restricted_hermitian_norm(&z[2], &bn)?,
        leaks,
        reassembly: 0.0,
        orthogonality: orthonormality_defect(&concat_columns(&[&q[0], &q[1], &q[2]], n)),
    };
    let [h0, h1, h2] = q;
    let [_, z1, z2] = <[ComplexMatrix; 3]>::try_from(z).expect("three blocks");
    let mut form = HyponormalBlockForm {
        n,
        alpha,
        premise_mode,
        premise_defect,
        norm,
        dims: [h0.cols(), h1.cols(), h2.cols()],
        upper_scalars,
        beta_targets,
        beta_diag,
        h0_basis: h0,
        h1_basis: h1,
        h2_basis: h2,
        v0,
        v1,
        a: ablk,
        b,
        z1,
        z2,
        interior: keep,
        defects,
        t_normal_defect: hermitian_norm(&interior_self_commutator(t, keep)?)?,
    };
    form.defects.reassembly = operator_norm(&(&form.reassemble() - t))?;
    Ok(form)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockNormality {
    pub v1_unitary: bool,
    pub b_normal: bool,
    /// `V1` unitary (or absent) and `B` normal.
    pub normal: bool,
    /// Normality of `T` measured directly.
    pub direct_normal: bool,
    pub agrees: bool,
}

/// Normality read off the blocks, cross-checked against `T` itself.
pub fn normality_from_blocks(form: &HyponormalBlockForm, tol: &ToleranceConfig) -> Result<BlockNormality> {
    let s = form.norm;
    let v1_unitary = if form.v1.rows() == 0 || form.v1.is_zero() {
        true
    } else {
        let co = &cogram(&form.v1) - &ComplexMatrix::identity(form.v1.rows());
        restricted_hermitian_norm(&form.z1, &co)? <= tol.eq_tol
    };
    let bn = &gram(&form.b) - &cogram(&form.b);
    let b_normal = restricted_hermitian_norm(&form.z2, &bn)? <= tol.eq_tol * s * s;
    let normal = v1_unitary && b_normal;
    let direct_normal = form.t_normal_defect <= tol.eq_tol * s * s;
    Ok(BlockNormality { v1_unitary, b_normal, normal, direct_normal, agrees: normal == direct_normal })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjointDefects {
    /// `||S1 S1* - I||`.
    pub s1_coisometry: f64,
    /// `||S1 A1*||`.
    pub s1_a1_star: f64,
    /// `||A1 A1* + B1 B1* - diag(beta^2)||`.
    pub gram_identity: f64,
    /// Smallest eigenvalue of `diag(beta^2) - B1* B1`.
    pub b1_margin: f64,
}

/// Lower-triangular form `[[S0, 0, 0], [0, alpha S1, 0], [0, A1, B1]]` of an
/// operator whose adjoint is hyponormal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointBlockForm {
    #[serde(skip)]
    pub s0: ComplexMatrix,
    #[serde(skip)]
    pub s1: ComplexMatrix,
    #[serde(skip)]
    pub a1: ComplexMatrix,
    #[serde(skip)]
    pub b1: ComplexMatrix,
    pub defects: AdjointDefects,
    /// Block form of `T*`.
    pub of_adjoint: HyponormalBlockForm,
}

impl AdjointBlockForm {
    pub fn holds(&self, tol: &ToleranceConfig) -> bool {
        let s = self.of_adjoint.norm.max(f64::MIN_POSITIVE);
        let d = &self.defects;
        let co_ok = self.of_adjoint.dims[1] == 0 || self.of_adjoint.alpha.alpha == 0.0 || d.s1_coisometry <= tol.eq_tol;
        co_ok && d.s1_a1_star <= tol.eq_tol * s && d.gram_identity <= tol.eq_tol * s * s && d.b1_margin >= -tol.psd_tol * s * s
    }
}

pub fn adjoint_block_form(op: &StructuredOperator, n: usize, opts: &DecomposeOptions) -> Result<AdjointBlockForm> {
    let adj = StructuredOperator::adjoint(op.clone());
    let f = hyponormal_block_form(&adj, n, opts)?;
    let s0 = f.v0.adjoint();
    let s1 = f.v1.adjoint();
    let a1 = f.a.adjoint();
    let b1 = f.b.adjoint();
    let beta2 = f.beta_squared();
    let s1a1 = &s1 * &a1.adjoint();
    let gram_id = &(&cogram(&a1) + &cogram(&b1)) - &beta2;
    let margin = &beta2 - &gram(&b1);
    let s1co = &cogram(&s1) - &ComplexMatrix::identity(s1.rows());
    let defects = AdjointDefects {
        s1_coisometry: if f.alpha.alpha > 0.0 { restricted_hermitian_norm(&f.z1, &s1co)? } else { 0.0 },
        s1_a1_star: if s1a1.rows() == 0 || s1a1.cols() == 0 { 0.0 } else { restricted_norm(&f.z1, &s1a1, &f.z2)? },
        gram_identity: restricted_hermitian_norm(&f.z2, &gram_id)?,
        b1_margin: min_eig(&restrict(&f.z2, &margin, &f.z2))?,
    };
    Ok(AdjointBlockForm { s0, s1, a1, b1, defects, of_adjoint: f })
}
