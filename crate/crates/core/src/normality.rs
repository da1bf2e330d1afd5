//! Normality criteria for hyponormal closure-AN operators, checked as
//! implications: premises come from declared data and the predicates, the
//! conclusion is the measured self-commutator on a family of sections.

use serde::{Deserialize, Serialize};

use crate::classification::{closure_an_membership, interior_self_commutator, is_hyponormal_interior, symbolic, weyl_spectrum_symbolic};
use crate::error::{OpError, Result};
use crate::exec::{self, Mode};
use crate::kernels::{cogram, gram, hermitian_eig, hermitian_norm, operator_norm, projector};
use crate::matrix::ComplexMatrix;
use crate::operator::{SpectralProfile, StructuredOperator};
use crate::section::{op_interior, Section};
use crate::spectrum::{Dim, SpectrumDescription};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Invertible,
    EqualKernels,
    WeylEqualsEssential,
    CompactHyponormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub full_defect: f64,
    pub interior_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayStudy {
    pub rows: Vec<DecayRow>,
    /// Interior defect never increases with n.
    pub monotone: bool,
}

impl DecayStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,full_defect,interior_defect\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", r.n, r.full_defect, r.interior_defect));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityVerdict {
    pub criterion: Criterion,
    pub premise_holds: bool,
    /// Which part of the premise failed, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premise_failure: Option<String>,
    /// Interior self-commutator norm at the largest dimension.
    pub commutator_defect: f64,
    pub norm: f64,
    pub conclusion_normal: bool,
    pub dims: Vec<usize>,
    pub study: DecayStudy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub putnam_bound: Option<f64>,
    /// Dimension of the kernel split off before measuring (equal-kernels criterion).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityOptions {
    pub dims: Vec<usize>,
    pub tol: ToleranceConfig,
    pub exec: Mode,
}

impl NormalityOptions {
    pub fn new(dims: Vec<usize>) -> Self {
        Self { dims, tol: ToleranceConfig::default(), exec: Mode::Auto }
    }
}

/// Area of the declared set divided by pi.
pub fn putnam_bound(spec: &SpectrumDescription) -> f64 {
    // + 0.0 maps -0.0 to 0.0
    spec.area_over_pi() + 0.0
}

/// Full and interior self-commutator norms of the sections.
pub fn commutator_decay_study(op: &StructuredOperator, dims: &[usize], tol: &ToleranceConfig, mode: Mode) -> Result<DecayStudy> {
    if dims.is_empty() {
        return Err(OpError::Invalid("decay study needs at least one dimension".into()));
    }
    let rows = exec::try_map(dims, mode, |&n| -> Result<DecayRow> {
        let keep = op_interior(op, n, tol)?;
        let t = Section::new(op, n)?.t;
        let c = (&gram(&t) - &cogram(&t)).hermitian_part();
        Ok(DecayRow {
            n,
            full_defect: hermitian_norm(&c)?,
            interior_defect: hermitian_norm(&interior_self_commutator(&t, keep)?)?,
        })
    })?;
    let scale = rows.iter().map(|r| r.interior_defect).fold(0.0, f64::max);
    let monotone = rows.windows(2).all(|w| w[1].interior_defect <= w[0].interior_defect + 1e-12 * scale.max(1.0));
    Ok(DecayStudy { rows, monotone })
}

/// Hyponormal (symbolically or on every interior) and in the closure of AN.
fn common_premise(op: &StructuredOperator, opts: &NormalityOptions) -> Result<(Option<SpectralProfile>, Option<String>)> {
    let profile = op.effective_profile();
    let Some(p) = &profile else {
        return Ok((None, Some("no declared profile".into())));
    };
    if !closure_an_membership(p) {
        return Ok((profile, Some("not in the closure of AN".into())));
    }
    if symbolic::hyponormal(op) != Some(true) {
        let checks = exec::try_map(&opts.dims, opts.exec, |&n| is_hyponormal_interior(op, n, &opts.tol))?;
        if let Some(c) = checks.iter().find(|c| !c.holds) {
            return Ok((profile, Some(format!("not hyponormal (interior defect {:e})", c.defect))));
        }
    }
    Ok((profile, None))
}

fn verdict(
    op: &StructuredOperator,
    criterion: Criterion,
    failure: Option<String>,
    opts: &NormalityOptions,
) -> Result<NormalityVerdict> {
    let study = commutator_decay_study(op, &opts.dims, &opts.tol, opts.exec)?;
    let n = *opts.dims.last().expect("dims checked non-empty");
    let norm = operator_norm(&Section::new(op, n)?.t)?;
    let defect = study.rows.last().map(|r| r.interior_defect).unwrap_or(0.0);
    let premise_holds = failure.is_none();
    Ok(NormalityVerdict {
        criterion,
        premise_holds,
        premise_failure: failure,
        commutator_defect: defect,
        norm,
        conclusion_normal: premise_holds && defect <= opts.tol.eq_tol * norm * norm,
        dims: opts.dims.clone(),
        study,
        putnam_bound: None,
        kernel_dim: None,
    })
}

fn check_dims(opts: &NormalityOptions) -> Result<()> {
    if opts.dims.is_empty() || opts.dims.contains(&0) {
        return Err(OpError::Invalid(format!("dims must be non-empty and positive: {:?}", opts.dims)));
    }
    Ok(())
}

/// Invertible hyponormal closure-AN operators are normal.
pub fn check_invertible_normal(op: &StructuredOperator, opts: &NormalityOptions) -> Result<NormalityVerdict> {
    check_dims(opts)?;
    let (profile, mut failure) = common_premise(op, opts)?;
    if failure.is_none() {
        let p = profile.as_ref().expect("premise passed with a profile");
        let onto = p.kernel_dim == Dim::Finite(0) && p.cokernel_dim == Dim::Finite(0);
        if !onto || p.min_modulus <= 0.0 {
            failure = Some(format!(
                "not invertible (kernel {:?}, cokernel {:?}, min modulus {})",
                p.kernel_dim, p.cokernel_dim, p.min_modulus
            ));
        }
    }
    verdict(op, Criterion::Invertible, failure, opts)
}

/// Numerical kernel of a PSD matrix as a projector.
fn kernel_projector(h: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let e = hermitian_eig(h, tol)?;
    let thr = tol.rank_tol * e.spectral_radius().max(f64::MIN_POSITIVE);
    Ok(projector(&crate::kernels::eigen_basis(&e, |l| l <= thr)))
}

/// Hyponormal closure-AN operators with `N(T) = N(T*)` are normal.
pub fn check_equal_kernels_normal(op: &StructuredOperator, opts: &NormalityOptions) -> Result<NormalityVerdict> {
    check_dims(opts)?;
    let (profile, mut failure) = common_premise(op, opts)?;
    let mut kernel_dim = None;
    if failure.is_none() {
        let p = profile.as_ref().expect("premise passed with a profile");
        if p.kernel_dim != p.cokernel_dim {
            failure = Some(format!("declared kernel {:?} differs from cokernel {:?}", p.kernel_dim, p.cokernel_dim));
        }
    }
    if failure.is_none() {
        // exact grams see N(T) and N(T*) inside each section without boundary artifacts
        let angle_tol = opts.tol.eq_tol.sqrt();
        let found = exec::try_map(&opts.dims, opts.exec, |&n| -> Result<(usize, f64)> {
            let s = Section::new(op, n)?;
            let pk = kernel_projector(&s.gram(), &opts.tol)?;
            let pc = kernel_projector(&s.cogram(), &opts.tol)?;
            let dim = pk.trace().re.round() as usize;
            Ok((dim, operator_norm(&(&pk - &pc))?))
        })?;
        if let Some((i, (_, gap))) = found.iter().enumerate().find(|(_, (_, g))| *g > angle_tol) {
            failure = Some(format!("kernels of T and T* differ at n = {} (projector gap {gap:e})", opts.dims[i]));
        } else {
            kernel_dim = found.last().map(|f| f.0);
        }
    }
    let mut v = verdict(op, Criterion::EqualKernels, failure, opts)?;
    v.kernel_dim = kernel_dim;
    Ok(v)
}

/// Hyponormal closure-AN operators whose essential spectrum equals the Weyl spectrum are normal.
pub fn check_weyl_condition_normal(op: &StructuredOperator, opts: &NormalityOptions) -> Result<NormalityVerdict> {
    check_dims(opts)?;
    let profile = op.effective_profile().ok_or_else(|| OpError::SpectrumUndeclared("no declared profile".into()))?;
    let declared = profile
        .spectrum
        .clone()
        .ok_or_else(|| OpError::SpectrumUndeclared("profile declares no spectral sets for T".into()))?;
    let weyl = weyl_spectrum_symbolic(&profile)?;
    let (_, mut failure) = common_premise(op, opts)?;
    if failure.is_none() && !declared.essential.same_set(&weyl) {
        failure = Some("essential spectrum differs from the Weyl spectrum".into());
    }
    let mut v = verdict(op, Criterion::WeylEqualsEssential, failure, opts)?;
    // sigma(T) = weyl + isolated eigenvalues of finite multiplicity, which have no area
    v.putnam_bound = Some(if v.premise_holds { putnam_bound(&weyl) } else { putnam_bound(&declared.spectrum) });
    Ok(v)
}

/// Compact hyponormal operators are normal.
pub fn check_compact_hyponormal(op: &StructuredOperator, opts: &NormalityOptions) -> Result<NormalityVerdict> {
    check_dims(opts)?;
    let (profile, mut failure) = common_premise(op, opts)?;
    if failure.is_none() {
        let p = profile.as_ref().expect("premise passed with a profile");
        if p.finite_dimension.is_none() && p.essential_points != [0.0] {
            failure = Some(format!("not compact (essential points {:?})", p.essential_points));
        }
    }
    verdict(op, Criterion::CompactHyponormal, failure, opts)
}
