use crate::error::{OpError, Result};
use crate::matrix::{ComplexMatrix, C64};

use super::{direct_sum_layout, OperatorKind, StructuredOperator};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    /// Reject finite blocks larger than the requested section instead of truncating them.
    pub strict: bool,
}

/// The `n x n` compression `P_n T P_n` onto `span{e_1..e_n}`.
pub fn render(op: &StructuredOperator, n: usize) -> Result<ComplexMatrix> {
    render_with(op, n, RenderOptions::default())
}

pub fn render_with(op: &StructuredOperator, n: usize, opts: RenderOptions) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(OpError::Invalid("section size must be at least 1".into()));
    }
    section(op, n, opts)
}

fn section(op: &StructuredOperator, n: usize, opts: RenderOptions) -> Result<ComplexMatrix> {
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let m = match op.kind() {
        OperatorKind::DiagonalWithLimit { entries, .. } => {
            let d = entries.take(n)?;
            ComplexMatrix::from_real_diag(&d)
        }
        OperatorKind::WeightedShift { weights } => {
            let mut m = ComplexMatrix::zeros(n, n);
            for k in 1..n {
                m[(k, k - 1)] = C64::new(weights.eval(k)?, 0.0);
            }
            m
        }
        OperatorKind::ScaledIdentity { scalar } => ComplexMatrix::identity(n).scale(*scalar),
        OperatorKind::FiniteMatrix { matrix } => {
            if opts.strict && matrix.rows() > n {
                return Err(OpError::DimensionMismatch(format!(
                    "finite block of size {} does not fit a section of size {n}",
                    matrix.rows()
                )));
            }
            matrix.embed_top_left(n, n)
        }
        OperatorKind::DirectSum { parts } => {
            let dims: Vec<Option<usize>> = parts.iter().map(|p| p.dimension()).collect();
            let layout = direct_sum_layout(&dims, n);
            let mut globals: Vec<Vec<usize>> = vec![Vec::new(); parts.len()];
            for (g, slot) in layout.iter().enumerate() {
                if let Some((p, _)) = slot {
                    globals[*p].push(g);
                }
            }
            let mut m = ComplexMatrix::zeros(n, n);
            for (part, idx) in parts.iter().zip(&globals) {
                if idx.is_empty() {
                    continue;
                }
                let block = section(part, idx.len(), opts)?;
                m.add_scattered(&block, idx, idx);
            }
            m
        }
        OperatorKind::Block2x2 { first, second, blocks } => {
            let maps = [(first, first), (first, second), (second, first), (second, second)];
            let mut m = ComplexMatrix::zeros(n, n);
            for (block, (rows, cols)) in blocks.iter().zip(maps) {
                let Some(block) = block else { continue };
                let (ri, ci) = (rows.indices(n), cols.indices(n));
                let size = ri.len().max(ci.len());
                if size == 0 {
                    continue;
                }
                let b = section(block, size, opts)?.top_left(ri.len(), ci.len());
                m.add_scattered(&b, &ri, &ci);
            }
            m
        }
        OperatorKind::Adjoint(inner) => section(inner, n, opts)?.adjoint(),
        OperatorKind::Compose(a, b) => {
            // exact compression: columns of B P_n live in the first n + bw(B) coordinates
            let big = n + b.bandwidth();
            let left = section(a, big, opts)?;
            let right = section(b, big, opts)?;
            (&left * &right).leading(n)
        }
        OperatorKind::Sum(a, b) => section(a, n, opts)?.try_add(&section(b, n, opts)?)?,
        OperatorKind::Scale(s, inner) => section(inner, n, opts)?.scale(*s),
        OperatorKind::InterleavedEmbedding { inner, map } => {
            let idx = map.indices(n);
            let mut m = ComplexMatrix::zeros(n, n);
            if !idx.is_empty() {
                let block = section(inner, idx.len(), opts)?;
                m.add_scattered(&block, &idx, &idx);
            }
            m
        }
    };
    Ok(m)
}
