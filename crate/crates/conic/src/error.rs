use thiserror::Error;

/// Structural problems with a [`ConicProgram`](crate::ConicProgram).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProgramError {
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveLength { expected: usize, found: usize },
    #[error("variable map covers {mapped} scalars but the program has {n_vars}")]
    VarMapOverflow { mapped: usize, n_vars: usize },
    #[error("variable blocks `{0}` and `{1}` overlap")]
    OverlappingBlocks(String, String),
    #[error("variable block `{0}` registered twice")]
    DuplicateBlock(String),
    #[error("complex variable block `{0}` has odd entry length")]
    OddComplexBlock(String),
    #[error("{location}: variable index {index} out of range (n_vars = {n_vars})")]
    IndexOutOfRange {
        location: String,
        index: usize,
        n_vars: usize,
    },
    #[error("{0}: duplicate variable index in one expression")]
    DuplicateIndex(String),
    #[error("{0}: non-finite coefficient")]
    NonFinite(String),
    #[error("{0}: inconsistent bounds")]
    BadBounds(String),
    #[error("{0}: cone has an empty body")]
    EmptyCone(String),
    #[error("{0}: cone head variable also appears in the cone body")]
    HeadInBody(String),
}

/// Failures while reading the text dump format.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `fdgroup-conic 1` header")]
    MissingHeader,
    #[error("missing `end` marker")]
    MissingEnd,
    #[error("dumped program is structurally invalid: {0}")]
    Invalid(#[from] ProgramError),
}
