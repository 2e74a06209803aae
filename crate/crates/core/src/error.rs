use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are split into input errors (the matrix or its file is malformed)
/// and analysis errors (the input is valid but a requested quantity does not
/// exist). [`Error::code`] gives a stable machine-readable name for each.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {bad_row} has {cols} entries")]
    NotSquare {
        rows: usize,
        bad_row: usize,
        cols: usize,
    },
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("declared m = {declared} does not match matrix dimension {actual}")]
    DimensionMismatch { declared: usize, actual: usize },
    #[error("entry ({0}, {1}) is negative or not finite")]
    NegativeEntry(usize, usize),
    #[error("row {0} sums to {1}, not 1")]
    RowSumViolation(usize, f64),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("symbol {symbol} is outside the alphabet 1..={m}")]
    InvalidSymbol { symbol: usize, m: usize },
    #[error("label list has {labels} entries for an alphabet of size {m}")]
    LabelMismatch { labels: usize, m: usize },
    #[error("could not parse matrix file: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),

    #[error("trivial factor: {0}")]
    TrivialFactor(&'static str),
    #[error("a run of {0} zeros after a one has probability zero")]
    UnreachableRun(usize),
    #[error("conditioning event has probability zero")]
    UnreachableEvent,
    #[error("iterative solver did not converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("matrix is reducible")]
    ReducibleInput,
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("matrix is aperiodic")]
    NotPeriodic,
    #[error("matrix is not primitive")]
    NotPrimitive,
    #[error("matrix is not reducible")]
    NotReducible,
    #[error("matrix has a zero entry")]
    NotStrictlyPositive,
    #[error("full transition matrix is reducible, stationary law is not unique")]
    ReducibleChain,
    #[error("enumeration of {0} paths exceeds the cap")]
    EnumerationTooLarge(u128),
    #[error("residue class {0} has a vanishing denominator")]
    DegenerateDirection(usize),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NOT_SQUARE",
            Error::AlphabetTooSmall(_) => "ALPHABET_TOO_SMALL",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::NegativeEntry(..) => "NEGATIVE_ENTRY",
            Error::RowSumViolation(..) => "ROW_SUM_VIOLATION",
            Error::InvalidPermutation(_) => "INVALID_PERMUTATION",
            Error::InvalidSymbol { .. } => "INVALID_SYMBOL",
            Error::LabelMismatch { .. } => "LABEL_MISMATCH",
            Error::Parse(_) => "PARSE_ERROR",
            Error::Io(_) => "IO_ERROR",
            Error::TrivialFactor(_) => "TRIVIAL_FACTOR",
            Error::UnreachableRun(_) => "UNREACHABLE_RUN",
            Error::UnreachableEvent => "UNREACHABLE_EVENT",
            Error::ConvergenceFailure(_) => "CONVERGENCE_FAILURE",
            Error::ReducibleInput => "REDUCIBLE_INPUT",
            Error::NotIrreducible => "NOT_IRREDUCIBLE",
            Error::NotPeriodic => "NOT_PERIODIC",
            Error::NotPrimitive => "NOT_PRIMITIVE",
            Error::NotReducible => "NOT_REDUCIBLE",
            Error::NotStrictlyPositive => "NOT_STRICTLY_POSITIVE",
            Error::ReducibleChain => "REDUCIBLE_CHAIN",
            Error::EnumerationTooLarge(_) => "ENUMERATION_TOO_LARGE",
            Error::DegenerateDirection(_) => "DEGENERATE_DIRECTION",
        }
    }

    /// True when the error is caused by the input itself rather than by the
    /// analysis of a valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::AlphabetTooSmall(_)
                | Error::DimensionMismatch { .. }
                | Error::NegativeEntry(..)
                | Error::RowSumViolation(..)
                | Error::InvalidPermutation(_)
                | Error::InvalidSymbol { .. }
                | Error::LabelMismatch { .. }
                | Error::Parse(_)
                | Error::Io(_)
        )
    }
}
