use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PicardError {
    #[error("symbol `{0}` has no declared degree")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` already declared with degree {existing}, not {requested}")]
    ConflictingDegree { symbol: String, existing: i64, requested: i64 },
    #[error("relation {relation} ∼ 0 has degree {degree}, expected 0")]
    NonzeroRelationDegree { relation: String, degree: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("parity: e = {e} and b = {b} must have the same parity")]
    Parity { e: i64, b: i64 },
    #[error("p_a is not an integer: c·c + c·K = {0} is odd")]
    ParityError(i64),
    #[error("class with negative S0 coefficient {0} is not effective-shaped")]
    NotEffective(i64),
    #[error("the bundle has no tracked splitting")]
    NotDecomposable,
    #[error(transparent)]
    Picard(#[from] PicardError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElmError {
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),
    #[error("history is empty")]
    EmptyHistory,
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("search frontier exceeded the budget of {0} states")]
    BudgetExceeded(usize),
    #[error("no resolution reaches the requested target")]
    NoResolution,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Picard(#[from] PicardError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error("k = {0} is not prime")]
    NonPrimeK(i64),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("a = {a} outside the window [{lo}, {hi}]")]
    OutOfWindow { a: i64, lo: i64, hi: i64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Elm(#[from] ElmError),
    #[error(transparent)]
    Picard(#[from] PicardError),
}
