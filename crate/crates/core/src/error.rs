use thiserror::Error;

/// Errors from scalar and series arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: i64, max: i64 },
    #[error("series variable sets differ")]
    IncompatibleWindows,
    #[error("unknown series variable `{0}`")]
    UnknownVariable(String),
    #[error("exponent {exp} of `{var}` is below the window low bound {low}")]
    WindowUnderflow { var: String, exp: i32, low: i32 },
    #[error("series is not nilpotent (a term has no positive power of a truncating variable)")]
    NotNilpotent,
    #[error("constant term is not invertible")]
    NotInvertible,
    #[error("`{0}` is not a Laurent variable")]
    NotLaurent(String),
    #[error("negative power of `{0}` cannot be substituted by a non-monomial series")]
    NegativeSubstitution(String),
}

/// Errors from the algebraic layers above exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("invalid cohomology ring: {0}")]
    InvalidRing(String),
    #[error("classes belong to different rings")]
    RingMismatch,
    #[error("unknown class label `{0}`")]
    UnknownClass(String),
    #[error("negative descendent index {0}")]
    NegativeIndex(i64),
    #[error("level {0} is not allowed here")]
    BadLevel(i64),
    #[error("formal symbols are not allowed here")]
    FormalSymbol,
    #[error("not an essential descendent: {0}")]
    NotEssential(String),
    #[error("descendents of the unit class are not supported: {0}")]
    UnitDescendent(String),
    #[error("block with {0} interacting factors and nonzero cohomology product")]
    BlockTooLarge(usize),
    #[error("missing table key {0}")]
    MissingKey(String),
    #[error("duplicate table key {0}")]
    DuplicateKey(String),
    #[error("malformed table line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
