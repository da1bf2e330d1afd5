use thiserror::Error;

pub type Result<T> = std::result::Result<T, OpError>;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("sequence rule has no value at index {index}: {reason}")]
    UndefinedSequenceIndex { index: usize, reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("interior is empty: n = {n}, margin = {margin}")]
    InteriorEmpty { n: usize, margin: usize },
    #[error("essential spectrum estimate contradicts declared profile: {0}")]
    Inconsistent(String),
    #[error("operator is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("no essential point available: {0}")]
    NoEssentialPoint(String),
    #[error("numerical rank is ambiguous: singular value {value:e} straddles threshold {threshold:e}")]
    RankAmbiguity { value: f64, threshold: f64 },
    #[error("operator is not quasinormal (defect {defect:e})")]
    NotQuasinormal { defect: f64 },
    #[error("essential eigenvalue cluster is ambiguous: {0}")]
    EssentialAmbiguity(String),
    #[error("operator is not hyponormal (defect {defect:e})")]
    NotHyponormal { defect: f64 },
    #[error("block {block} leaks outside its pattern (norm {norm:e})")]
    BlockLeak { block: String, norm: f64 },
    #[error("operator is not invertible (min modulus {min_modulus:e})")]
    NotInvertible { min_modulus: f64 },
    #[error("essential point alpha is zero")]
    AlphaZero,
    #[error("spectrum is not declared: {0}")]
    SpectrumUndeclared(String),
    #[error("recipe infeasible: {0}")]
    RecipeInfeasible(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },
}
