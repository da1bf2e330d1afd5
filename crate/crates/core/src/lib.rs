//! Finite-section laboratory for structured operators on l2(N).
//!
//! Operators are described symbolically ([`operator::StructuredOperator`]) together
//! with declared spectral data, rendered to dense sections `P_n T P_n`, and then
//! classified, decomposed and checked against normality criteria.

pub mod classification;
pub mod decomposition;
pub mod error;
pub mod exec;
pub mod generate;
pub mod kernels;
pub mod matrix;
pub mod normality;
pub mod operator;
pub mod report;
pub mod section;
pub mod spectrum;
pub mod tolerance;

pub use error::{OpError, Result};
pub use matrix::{ComplexMatrix, C64};
pub use operator::{SpectralProfile, StructuredOperator};
pub use tolerance::ToleranceConfig;
