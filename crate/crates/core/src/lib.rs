//! Decompositions of one-dimensional positive semidefinite operators (MPDO form,
//! separable decompositions, local purifications and their translation-invariant
//! versions), factorizations of nonnegative matrices, and the converters between
//! decompositions of bipartite diagonal operators and factorizations of their
//! diagonal.

pub mod correspondence;
pub mod decomp;
pub mod error;
pub mod linalg;
pub mod nonneg;
pub mod sampling;
pub mod tensor;

pub use error::{Error, Result};
pub use nonneg::NonnegMatrix;
pub use tensor::{MpoTrain, Operator, PsdOperator, SiteSpec, TiSiteTensor};
