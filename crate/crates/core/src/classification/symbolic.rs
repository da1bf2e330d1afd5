//! Class facts read off the operator AST. `Some(b)` is a decision, `None` means
//! the construction alone does not settle the question.

use crate::matrix::ComplexMatrix;
use crate::operator::{OperatorKind, SeqRule, StructuredOperator};

/// Weighted-shift weights are checked for monotonicity on this many leading terms.
const WEIGHT_HORIZON: usize = 4096;

/// Exactness threshold for finite blocks, relative to the squared entry scale.
const FINITE_EXACT: f64 = 1e-13;

fn finite_commutator(m: &ComplexMatrix) -> f64 {
    let a = m.adjoint();
    (&(&a * m) - &(m * &a)).max_abs()
}

fn all_parts(parts: &[&StructuredOperator], f: fn(&StructuredOperator) -> Option<bool>) -> Option<bool> {
    let mut undecided = false;
    for p in parts {
        match f(p) {
            Some(false) => return Some(false),
            None => undecided = true,
            Some(true) => {}
        }
    }
    if undecided {
        None
    } else {
        Some(true)
    }
}

/// Block operators with vanishing off-diagonal blocks are direct sums.
fn diagonal_blocks(op: &StructuredOperator) -> Option<Vec<&StructuredOperator>> {
    match op.kind() {
        OperatorKind::Block2x2 { blocks, .. } if blocks[1].is_none() && blocks[2].is_none() => {
            Some([&blocks[0], &blocks[3]].into_iter().flatten().collect())
        }
        _ => None,
    }
}

fn is_zero_rule(rule: &SeqRule) -> bool {
    rule.is_constant() == Some(0.0)
}

fn is_scalar(op: &StructuredOperator) -> bool {
    matches!(op.kind(), OperatorKind::ScaledIdentity { .. })
}

pub fn normal(op: &StructuredOperator) -> Option<bool> {
    match op.kind() {
        OperatorKind::DiagonalWithLimit { .. } | OperatorKind::ScaledIdentity { .. } => Some(true),
        // a weighted shift with a nonzero weight has a positive diagonal entry in T*T - TT*
        OperatorKind::WeightedShift { weights } => Some(is_zero_rule(weights)),
        OperatorKind::FiniteMatrix { matrix } => {
            let s = matrix.max_abs();
            Some(finite_commutator(matrix) <= FINITE_EXACT * s * s)
        }
        OperatorKind::DirectSum { parts } => all_parts(&parts.iter().collect::<Vec<_>>(), normal),
        OperatorKind::Block2x2 { .. } => diagonal_blocks(op).and_then(|b| all_parts(&b, normal)),
        OperatorKind::Adjoint(inner) | OperatorKind::InterleavedEmbedding { inner, .. } => normal(inner),
        OperatorKind::Scale(s, inner) => {
            if *s == crate::matrix::ZERO {
                Some(true)
            } else {
                normal(inner)
            }
        }
        OperatorKind::Sum(a, b) => match (is_scalar(a), is_scalar(b)) {
            (true, _) => normal(b),
            (_, true) => normal(a),
            _ => None,
        },
        OperatorKind::Compose(a, b) => match (is_scalar(a), is_scalar(b)) {
            (true, _) => normal(b),
            (_, true) => normal(a),
            _ => None,
        },
    }
}

pub fn quasinormal(op: &StructuredOperator) -> Option<bool> {
    if normal(op) == Some(true) {
        return Some(true);
    }
    match op.kind() {
        // |w_k| constant: a multiple of an isometry
        OperatorKind::WeightedShift { weights } => weights.is_constant().map(|_| true),
        OperatorKind::FiniteMatrix { matrix } => {
            let g = &matrix.adjoint() * matrix;
            let c = &(matrix * &g) - &(&g * matrix);
            let s = matrix.max_abs();
            Some(c.max_abs() <= FINITE_EXACT * s * s * s)
        }
        OperatorKind::DirectSum { parts } => all_parts(&parts.iter().collect::<Vec<_>>(), quasinormal),
        OperatorKind::Block2x2 { .. } => diagonal_blocks(op).and_then(|b| all_parts(&b, quasinormal)),
        OperatorKind::InterleavedEmbedding { inner, .. } | OperatorKind::Scale(_, inner) => quasinormal(inner),
        _ => None,
    }
}

/// Magnitudes nondecreasing on the leading terms.
fn monotone_weights(rule: &SeqRule) -> Option<bool> {
    if rule.is_constant().is_some() {
        return Some(true);
    }
    let w = rule.take(WEIGHT_HORIZON).ok()?;
    Some(w.windows(2).all(|p| p[1].abs() >= p[0].abs()))
}

pub fn hyponormal(op: &StructuredOperator) -> Option<bool> {
    if quasinormal(op) == Some(true) {
        return Some(true);
    }
    match op.kind() {
        OperatorKind::WeightedShift { weights } => monotone_weights(weights),
        OperatorKind::FiniteMatrix { .. } => normal(op),
        OperatorKind::DirectSum { parts } => all_parts(&parts.iter().collect::<Vec<_>>(), hyponormal),
        OperatorKind::Block2x2 { .. } => diagonal_blocks(op).and_then(|b| all_parts(&b, hyponormal)),
        OperatorKind::InterleavedEmbedding { inner, .. } | OperatorKind::Scale(_, inner) => hyponormal(inner),
        _ => None,
    }
}

pub fn selfadjoint(op: &StructuredOperator) -> Option<bool> {
    match op.kind() {
        OperatorKind::DiagonalWithLimit { .. } => Some(true),
        OperatorKind::ScaledIdentity { scalar } => Some(scalar.im == 0.0),
        OperatorKind::WeightedShift { weights } => Some(is_zero_rule(weights)),
        OperatorKind::FiniteMatrix { matrix } => Some(matrix.hermitian_asymmetry() <= FINITE_EXACT * matrix.max_abs()),
        OperatorKind::DirectSum { parts } => all_parts(&parts.iter().collect::<Vec<_>>(), selfadjoint),
        OperatorKind::Adjoint(inner) | OperatorKind::InterleavedEmbedding { inner, .. } => selfadjoint(inner),
        OperatorKind::Scale(s, inner) if s.im == 0.0 => selfadjoint(inner),
        OperatorKind::Sum(a, b) => match (selfadjoint(a), selfadjoint(b)) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        _ => None,
    }
}
