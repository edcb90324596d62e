use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("columns are linearly dependent")]
    DependentColumns,
    #[error("fan is not complete: {0}")]
    IncompleteFan(String),
    #[error("wall relation is not integral across wall {0:?}")]
    NonIntegralRelation(Vec<usize>),
    #[error("rays {0} and {1} do not span a two-cone of the fan")]
    NotATwoCone(usize, usize),
    #[error("wall generators {0:?} are linearly dependent")]
    DegenerateWall(Vec<usize>),
    #[error("no bad two-cone candidates to select from")]
    EmptyCandidates,
    #[error("support function has {got} values but the fan has {expected} rays")]
    MissingRayValue { expected: usize, got: usize },
    #[error("arrangement support function failed the wall dichotomy: {0}")]
    HNotConvex(String),
    #[error("certificate construction failed: {0}")]
    CertificateFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("basis matrix is not unimodular (determinant {0})")]
    NotUnimodular(String),
}
