use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller passed arguments that make no sense (empty lists, bad cut index, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input lies outside the mathematical domain of the operation
    /// (materially non-psd operator, negative matrix entry, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("bond dimension mismatch between cores {left} and {right}: {left_dim} != {right_dim}")]
    BondMismatch {
        left: usize,
        right: usize,
        left_dim: usize,
        right_dim: usize,
    },

    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },

    #[error("operator is not diagonal in the computational basis (off-diagonal mass {mass:.3e})")]
    NotDiagonal { mass: f64 },

    #[error("operator is not translation invariant (shift defect {defect:.3e})")]
    NotTranslationInvariant { defect: f64 },

    /// An enumeration would exceed its configured budget.
    #[error("enumeration budget exceeded: {needed} items requested, cap is {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },

    #[error("certificate kind mismatch: expected {expected}, got {found}")]
    KindMismatch { expected: String, found: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}
