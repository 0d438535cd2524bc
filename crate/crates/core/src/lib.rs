//! Exact symbolic engine for superaffine SUSY vertex algebras built from
//! left-invariant G2-structures with torsion, and for checking embeddings of
//! the deformed Shatashvili-Vafa algebra inside them.

pub mod expr;
pub mod embed;
pub mod forms;
pub mod g2;
pub mod liealg;
pub mod linalg;
pub mod manifest;
pub mod report;
pub mod scalar;
pub mod sva;
pub mod va;

pub use scalar::{Param, ParamKind, Ring, Scalar, ScalarError};
