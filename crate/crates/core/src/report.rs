//! Plot-ready tables and plain-text summaries.
//!
//! Tables use the long format `n,metric,value` with reals printed to 17
//! significant digits and LF line endings, so identical inputs give identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::classification::{estimate_unchecked, is_hyponormal_interior, is_normal_interior, ClassificationReport, EvalMode};
use crate::decomposition::{hyponormal_block_form, quasinormal_decompose, DecomposeOptions, HyponormalBlockForm, QuasinormalDecomposition};
use crate::error::Result;
use crate::exec::{self, Mode};
use crate::kernels::hermitian_eigvals;
use crate::normality::NormalityVerdict;
use crate::operator::StructuredOperator;
use crate::section::{op_interior, Section};

/// Real number with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LongTable {
    pub rows: Vec<(usize, String, f64)>,
}

impl LongTable {
    pub fn push(&mut self, n: usize, metric: &str, value: f64) {
        self.rows.push((n, metric.to_string(), value));
    }

    /// Values of one metric in row order.
    pub fn column(&self, metric: &str) -> Vec<(usize, f64)> {
        self.rows.iter().filter(|r| r.1 == metric).map(|r| (r.0, r.2)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,metric,value\n");
        for (n, m, v) in &self.rows {
            let _ = writeln!(s, "{n},{m},{}", fmt_real(*v));
        }
        s
    }
}

/// Metrics reported per dimension. Names ending in `_defect` should vanish for normal operators.
pub const STUDY_METRICS: [&str; 10] = [
    "essential_estimate",
    "min_modulus",
    "hyponormal_interior_defect",
    "normal_interior_defect",
    "bb_margin",
    "v1_star_a_defect",
    "gram_identity_defect",
    "hyponormal_reassembly_defect",
    "quasinormal_reassembly_defect",
    "unitarity_defect",
];

/// Dimension triple used for the estimate reported at `n`.
fn estimate_dims(n: usize) -> Option<[usize; 3]> {
    (n / 4 >= 16).then_some([n / 4, n / 2, n])
}

fn study_row(op: &StructuredOperator, n: usize, opts: &DecomposeOptions) -> Result<Vec<(&'static str, f64)>> {
    let tol = &opts.tol;
    let inner = DecomposeOptions { exec: Mode::Sequential, ..*opts };
    let mut out = Vec::new();
    if !op.is_finite_dimensional() {
        if let Some(d) = estimate_dims(n) {
            if let Ok(est) = estimate_unchecked(op, &d, tol, Mode::Sequential) {
                if let [c] = est.modulus_points().as_slice() {
                    out.push(("essential_estimate", c.center));
                }
            }
        }
    }
    let g = Section::new(op, n)?.gram();
    let min_eig = hermitian_eigvals(&g)?.first().copied().unwrap_or(0.0);
    out.push(("min_modulus", min_eig.max(0.0).sqrt()));
    if op_interior(op, n, tol).is_ok() {
        out.push(("hyponormal_interior_defect", is_hyponormal_interior(op, n, tol)?.defect));
        out.push(("normal_interior_defect", is_normal_interior(op, n, tol)?.defect));
    }
    if let Ok(f) = hyponormal_block_form(op, n, &inner) {
        out.push(("bb_margin", f.defects.bb_margin));
        out.push(("v1_star_a_defect", f.defects.v1_star_a));
        out.push(("gram_identity_defect", f.defects.gram_identity));
        out.push(("hyponormal_reassembly_defect", f.defects.reassembly));
    }
    if let Ok(q) = quasinormal_decompose(op, n, &inner) {
        out.push(("quasinormal_reassembly_defect", q.reassembly_error));
        out.push(("unitarity_defect", q.max_unitarity_defect()));
    }
    Ok(out)
}

/// Per-dimension corroboration of the symbolic claims. Dimensions run
/// concurrently; rows come back in dimension order.
pub fn convergence_study(op: &StructuredOperator, dims: &[usize], opts: &DecomposeOptions) -> Result<LongTable> {
    opts.tol.validate()?;
    let rows = exec::try_map(dims, opts.exec, |&n| study_row(op, n, opts))?;
    let mut t = LongTable::default();
    for (&n, row) in dims.iter().zip(rows) {
        for (m, v) in row {
            t.push(n, m, v);
        }
    }
    Ok(t)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn summarize_classification(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "classification (dims {:?})", r.dims_tested);
    for (class, flags) in &r.flags {
        let modes: std::collections::BTreeSet<EvalMode> = flags.iter().map(|f| f.mode).collect();
        let parts: Vec<String> = modes
            .iter()
            .map(|&m| format!("{}={}", serde_json::to_value(m).map(|v| v.as_str().unwrap_or("?").to_string()).unwrap_or_default(), r.holds(class, m) == Some(true)))
            .collect();
        let _ = writeln!(s, "  {class:<16} {}", parts.join(" "));
    }
    if let Some(e) = &r.essential_estimate {
        let c: Vec<String> = e.modulus_points().iter().map(|c| format!("{:.6}", c.center)).collect();
        let _ = writeln!(s, "  essential |T| estimate: [{}]", c.join(", "));
    }
    if let Some(f) = &r.fredholm {
        let _ = writeln!(s, "  fredholm: {} index {:?}", yes(f.is_fredholm), f.index);
    }
    if let Some(m) = &r.estimate_mismatch {
        let _ = writeln!(s, "  MISMATCH: {m}");
    }
    s
}

pub fn summarize_quasinormal(q: &QuasinormalDecomposition) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "quasinormal decomposition at n = {} (alpha = {:.12}, {:?})", q.n, q.alpha.alpha, q.alpha.source);
    for b in q.upper_blocks.iter().chain(&q.lower_blocks) {
        let _ = writeln!(s, "  block {:>.12} dim {:>4} unitarity defect {:.3e}", b.scalar, b.dim, b.unitarity_defect);
    }
    if let Some(e) = &q.essential_block {
        let _ = writeln!(s, "  essential alpha V: dim {} V*V defect {:.3e} ({:?})", e.dim, e.isometry_defect, q.essential_kind);
    }
    let _ = writeln!(s, "  reassembly error {:.3e}, norm {:.12}", q.reassembly_error, q.norm);
    s
}

pub fn summarize_hyponormal(f: &HyponormalBlockForm) -> String {
    let d = &f.defects;
    let mut s = String::new();
    let _ = writeln!(s, "hyponormal block form at n = {} (alpha = {:.12})", f.n, f.alpha.alpha);
    let _ = writeln!(s, "  dims H0/H1/H2 = {}/{}/{}", f.dims[0], f.dims[1], f.dims[2]);
    let _ = writeln!(s, "  ||V1* A|| = {:.3e}", d.v1_star_a);
    let _ = writeln!(s, "  ||A*A + B*B - beta^2|| = {:.3e}", d.gram_identity);
    let _ = writeln!(s, "  BB* margin = {:.3e}", d.bb_margin);
    let _ = writeln!(s, "  reassembly = {:.3e}", d.reassembly);
    s
}

pub fn summarize_verdict(v: &NormalityVerdict) -> String {
    let mut s = format!(
        "{:?}: premise {} conclusion normal {} (defect {:.3e}, ||T|| = {:.6})",
        v.criterion,
        yes(v.premise_holds),
        yes(v.conclusion_normal),
        v.commutator_defect,
        v.norm
    );
    if let Some(f) = &v.premise_failure {
        let _ = write!(s, " [{f}]");
    }
    s.push('\n');
    s
}
