use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} variables, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("coefficient rings differ")]
    RingMismatch,
    #[error("operation requires a field of coefficients")]
    NotAField,
    #[error("operation requires a ring with nilpotents")]
    NotNilpotentRing,
    #[error("invalid ring descriptor: {0}")]
    InvalidRing(String),
    #[error("scaling by {lambda} does not preserve the exponent monoid {monoid}")]
    MonoidNotStable { lambda: String, monoid: String },
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("no eigenvalue in the coefficient field")]
    EigenvalueNotInField,
    #[error("seed vector is zero")]
    ZeroSeed,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("not a descent datum: {0}")]
    NotDescentDatum(String),
    #[error("cocycle condition violated")]
    CocycleViolated,
    #[error("not a square-zero step: {0}")]
    NotSquareZeroStep(String),
    #[error("additive cocycle violated; residual {residual}")]
    AdditiveCocycleViolated { residual: String },
    #[error("support split failed: {0}")]
    SupportSplitFailed(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("cannot read input: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
