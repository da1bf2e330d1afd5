//! Symbolic operators on l2(N) with declared spectral metadata, rendered
//! deterministically to finite sections `P_n T P_n`.

pub mod catalog;
mod json;
pub mod profile;
mod render;
pub mod seq;

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::matrix::{ComplexMatrix, C64};

pub use json::{from_json, from_json_str, to_json, to_json_string};
pub use profile::{PointSequence, PointTail, SpectralPoint, SpectralProfile};
pub use render::{render, render_with, RenderOptions};
pub use seq::SeqRule;

/// Arithmetic progression of coordinates `start, start + step, ...` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMap {
    pub start: usize,
    pub step: usize,
}

impl IndexMap {
    pub const IDENTITY: IndexMap = IndexMap { start: 1, step: 1 };
    pub const ODD: IndexMap = IndexMap { start: 1, step: 2 };
    pub const EVEN: IndexMap = IndexMap { start: 2, step: 2 };

    /// Global 1-based coordinate of local coordinate `k` (1-based).
    pub fn global(&self, k: usize) -> usize {
        self.start + (k - 1) * self.step
    }

    /// Number of local coordinates that land in `1..=n`.
    pub fn count(&self, n: usize) -> usize {
        if n < self.start {
            0
        } else {
            (n - self.start) / self.step + 1
        }
    }

    /// 0-based global indices of the first `count(n)` local coordinates.
    pub fn indices(&self, n: usize) -> Vec<usize> {
        (1..=self.count(n)).map(|k| self.global(k) - 1).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.start == 0 || self.step == 0 {
            return Err(OpError::Invalid(format!("index map needs start >= 1 and step >= 1: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// Real diagonal `diag(entries(1), entries(2), ...)` with declared limit.
    DiagonalWithLimit { entries: SeqRule, limit: f64 },
    /// `e_k -> weights(k) e_{k+1}`.
    WeightedShift { weights: SeqRule },
    ScaledIdentity { scalar: C64 },
    /// Acts on `C^d`; on l2(N) it is padded with zeros.
    FiniteMatrix { matrix: ComplexMatrix },
    /// Coordinates dealt round-robin among parts that still have room.
    DirectSum { parts: Vec<StructuredOperator> },
    /// Block operator over `H_first (+) H_second`; `None` blocks are zero.
    /// Order: first->first, second->first, first->second, second->second.
    Block2x2 { first: IndexMap, second: IndexMap, blocks: Box<[Option<StructuredOperator>; 4]> },
    Adjoint(Box<StructuredOperator>),
    Compose(Box<StructuredOperator>, Box<StructuredOperator>),
    Sum(Box<StructuredOperator>, Box<StructuredOperator>),
    Scale(C64, Box<StructuredOperator>),
    /// `J inner J*` for the isometric embedding given by `map`.
    InterleavedEmbedding { inner: Box<StructuredOperator>, map: IndexMap },
}

/// Immutable operator description plus optional declared profile.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredOperator {
    kind: OperatorKind,
    profile: Option<SpectralProfile>,
}

impl StructuredOperator {
    fn new(kind: OperatorKind) -> Self {
        Self { kind, profile: None }
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn profile(&self) -> Option<&SpectralProfile> {
        self.profile.as_ref()
    }

    pub fn with_profile(mut self, profile: SpectralProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn without_profile(mut self) -> Self {
        self.profile = None;
        self
    }

    pub fn diagonal(entries: SeqRule, limit: f64) -> Self {
        Self::new(OperatorKind::DiagonalWithLimit { entries, limit })
    }

    pub fn weighted_shift(weights: SeqRule) -> Self {
        Self::new(OperatorKind::WeightedShift { weights })
    }

    pub fn scaled_identity(scalar: C64) -> Self {
        Self::new(OperatorKind::ScaledIdentity { scalar })
    }

    pub fn identity() -> Self {
        Self::scaled_identity(C64::new(1.0, 0.0))
    }

    pub fn finite(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(OpError::ShapeMismatch(format!("finite block must be square, got {}x{}", matrix.rows(), matrix.cols())));
        }
        if !matrix.is_finite() {
            return Err(OpError::Invalid("finite block has non-finite entries".into()));
        }
        Ok(Self::new(OperatorKind::FiniteMatrix { matrix }))
    }

    pub fn direct_sum(parts: Vec<StructuredOperator>) -> Result<Self> {
        if parts.is_empty() {
            return Err(OpError::Invalid("direct sum needs at least one part".into()));
        }
        Ok(Self::new(OperatorKind::DirectSum { parts }))
    }

    pub fn block2x2(first: IndexMap, second: IndexMap, blocks: [Option<StructuredOperator>; 4]) -> Result<Self> {
        first.validate()?;
        second.validate()?;
        if first.step != second.step {
            return Err(OpError::ShapeMismatch("block subspaces must interleave with a common step".into()));
        }
        // the two progressions must partition the coordinates
        let horizon = 4 * first.step + first.start + second.start;
        let mut seen = vec![0u8; horizon + 1];
        for m in [first, second] {
            for g in m.indices(horizon) {
                seen[g + 1] += 1;
            }
        }
        if seen[1..].iter().any(|&c| c != 1) {
            return Err(OpError::ShapeMismatch(format!("{first:?} and {second:?} do not partition the coordinates")));
        }
        Ok(Self::new(OperatorKind::Block2x2 { first, second, blocks: Box::new(blocks) }))
    }

    /// Adjoint, collapsing double adjoints.
    pub fn adjoint(op: StructuredOperator) -> Self {
        match op.kind {
            OperatorKind::Adjoint(inner) => match (op.profile, inner.profile.is_none()) {
                (Some(p), true) => (*inner).with_profile(p.adjoint_profile()),
                _ => *inner,
            },
            kind => Self::new(OperatorKind::Adjoint(Box::new(Self { kind, profile: op.profile }))),
        }
    }

    fn check_compatible(a: &Self, b: &Self, what: &str) -> Result<()> {
        if let (Some(x), Some(y)) = (a.dimension(), b.dimension()) {
            if x != y {
                return Err(OpError::ShapeMismatch(format!("{what} of operators on C^{x} and C^{y}")));
            }
        }
        Ok(())
    }

    pub fn compose(left: StructuredOperator, right: StructuredOperator) -> Result<Self> {
        Self::check_compatible(&left, &right, "composition")?;
        Ok(Self::new(OperatorKind::Compose(Box::new(left), Box::new(right))))
    }

    pub fn sum(left: StructuredOperator, right: StructuredOperator) -> Result<Self> {
        Self::check_compatible(&left, &right, "sum")?;
        Ok(Self::new(OperatorKind::Sum(Box::new(left), Box::new(right))))
    }

    /// `scalar * op`; unit scalars are dropped and nested scales merged.
    pub fn scale(scalar: C64, op: StructuredOperator) -> Self {
        if scalar == C64::new(1.0, 0.0) {
            return op;
        }
        match op.kind {
            OperatorKind::Scale(s, inner) if op.profile.is_none() => Self::scale(scalar * s, *inner),
            kind => Self::new(OperatorKind::Scale(scalar, Box::new(Self { kind, profile: op.profile }))),
        }
    }

    pub fn embed(inner: StructuredOperator, map: IndexMap) -> Result<Self> {
        map.validate()?;
        Ok(Self::new(OperatorKind::InterleavedEmbedding { inner: Box::new(inner), map }))
    }

    /// The declared profile, or one derived from a declared profile one level down
    /// (adjoints and scalar multiples).
    pub fn effective_profile(&self) -> Option<SpectralProfile> {
        if let Some(p) = &self.profile {
            return Some(p.clone());
        }
        match &self.kind {
            OperatorKind::Adjoint(inner) => inner.effective_profile().map(|p| p.adjoint_profile()),
            OperatorKind::Scale(s, inner) => inner.effective_profile().and_then(|p| p.scaled(s.norm()).ok()),
            _ => None,
        }
    }

    /// `None` on l2(N); `Some(d)` for operators on `C^d`.
    pub fn dimension(&self) -> Option<usize> {
        match &self.kind {
            OperatorKind::FiniteMatrix { matrix } => Some(matrix.rows()),
            OperatorKind::DirectSum { parts } => parts.iter().map(|p| p.dimension()).sum(),
            OperatorKind::Adjoint(inner) | OperatorKind::Scale(_, inner) => inner.dimension(),
            OperatorKind::Compose(a, b) | OperatorKind::Sum(a, b) => match (a.dimension(), b.dimension()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            },
            OperatorKind::InterleavedEmbedding { inner, map } => inner.dimension().map(|d| if d == 0 { 0 } else { map.global(d) }),
            _ => None,
        }
    }

    /// Upper bound `b` with `<e_i, T e_j> = 0` whenever `|i - j| > b`.
    pub fn bandwidth(&self) -> usize {
        match &self.kind {
            OperatorKind::DiagonalWithLimit { .. } | OperatorKind::ScaledIdentity { .. } => 0,
            OperatorKind::WeightedShift { .. } => 1,
            OperatorKind::FiniteMatrix { matrix } => matrix.bandwidth(),
            OperatorKind::DirectSum { parts } => {
                let gaps = direct_sum_gaps(parts);
                parts.iter().zip(gaps).map(|(p, g)| p.bandwidth() * g).max().unwrap_or(0)
            }
            OperatorKind::Block2x2 { first, second, blocks } => {
                let maps = [(first, first), (first, second), (second, first), (second, second)];
                blocks
                    .iter()
                    .zip(maps)
                    .filter_map(|(b, (rows, cols))| {
                        b.as_ref().map(|b| b.bandwidth() * rows.step + rows.start.abs_diff(cols.start))
                    })
                    .max()
                    .unwrap_or(0)
            }
            OperatorKind::Adjoint(inner) | OperatorKind::Scale(_, inner) => inner.bandwidth(),
            OperatorKind::Compose(a, b) => a.bandwidth() + b.bandwidth(),
            OperatorKind::Sum(a, b) => a.bandwidth().max(b.bandwidth()),
            OperatorKind::InterleavedEmbedding { inner, map } => inner.bandwidth() * map.step,
        }
    }

    /// True when the AST contains no unbounded-dimension part.
    pub fn is_finite_dimensional(&self) -> bool {
        self.dimension().is_some()
    }
}

/// Round-robin assignment of global coordinates (0-based) to `(part, local)` pairs.
pub(crate) fn direct_sum_layout(dims: &[Option<usize>], n: usize) -> Vec<Option<(usize, usize)>> {
    let mut used = vec![0usize; dims.len()];
    let mut out = Vec::with_capacity(n);
    let mut cursor = 0usize;
    for _ in 0..n {
        let mut slot = None;
        for step in 0..dims.len() {
            let p = (cursor + step) % dims.len();
            if dims[p].is_none_or(|d| used[p] < d) {
                slot = Some(p);
                cursor = p + 1;
                break;
            }
        }
        match slot {
            Some(p) => {
                out.push(Some((p, used[p])));
                used[p] += 1;
            }
            None => out.push(None),
        }
    }
    out
}

/// Largest distance between consecutive global coordinates of each part.
fn direct_sum_gaps(parts: &[StructuredOperator]) -> Vec<usize> {
    let dims: Vec<Option<usize>> = parts.iter().map(|p| p.dimension()).collect();
    let finite_total: usize = dims.iter().flatten().sum();
    let horizon = (finite_total + 2) * parts.len() + 2 * parts.len();
    let layout = direct_sum_layout(&dims, horizon);
    let mut last: Vec<Option<usize>> = vec![None; parts.len()];
    let mut gaps = vec![1usize; parts.len()];
    for (g, slot) in layout.iter().enumerate() {
        if let Some((p, _)) = slot {
            if let Some(prev) = last[*p] {
                gaps[*p] = gaps[*p].max(g - prev);
            }
            last[*p] = Some(g);
        }
    }
    gaps
}
