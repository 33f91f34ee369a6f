use std::fmt;

/// Front-end failure, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, unmet preconditions.
    Usage(String),
    /// A search or enumeration ran out of budget.
    Exhausted(String),
    /// The input fails a necessary mathematical condition.
    Rejected(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Exhausted(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Rejected(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Exhausted(m) | CliError::Rejected(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<mpdo_core::Error> for CliError {
    fn from(e: mpdo_core::Error) -> Self {
        use mpdo_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Usage(_)
            | E::Shape(_)
            | E::BondMismatch { .. }
            | E::NotDiagonal { .. }
            | E::NotSymmetric { .. }
            | E::KindMismatch { .. } => CliError::Usage(msg),
            E::BudgetExceeded { .. } | E::Numerical(_) => CliError::Exhausted(msg),
            E::Domain(_) | E::NotTranslationInvariant { .. } => CliError::Rejected(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
