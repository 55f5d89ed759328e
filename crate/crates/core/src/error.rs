use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which family of projection-chain identities failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainViolationKind {
    Shape,
    Idempotent,
    Rank,
    Commute,
    Contraction,
    NotIdentity,
    StartImage,
}

impl std::fmt::Display for ChainViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Shape => "shape",
            Self::Idempotent => "idempotent",
            Self::Rank => "rank",
            Self::Commute => "commute",
            Self::Contraction => "contraction",
            Self::NotIdentity => "identity",
            Self::StartImage => "start-image",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("point set is not full-dimensional")]
    NotFullDimensional,
    #[error("functionals do not bound the body")]
    Unbounded,
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },
    #[error("matrix does not have full row rank")]
    RankDeficient,
    #[error("zero vector is not a valid vertex or functional")]
    ZeroVector,
    #[error("invalid ball: {0}")]
    InvalidBall(String),
    #[error("not in monotone position: truncation P_{k} moves vertex {vertex} outside the ball")]
    NotMonotone { k: usize, vertex: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("denominator bound too small: {0}")]
    BoundTooSmall(String),
    #[error("not an isometry at x = {x}: |x| = {domain_norm}, |Tx| = {codomain_norm}")]
    NotIsometry {
        x: String,
        domain_norm: String,
        codomain_norm: String,
    },
    #[error("not an eps-isometry at x = {x}: |x| = {domain_norm}, |Tx| = {codomain_norm}")]
    NotEpsIsometry {
        x: String,
        domain_norm: String,
        codomain_norm: String,
    },
    #[error("projection chain violation ({kind}) at index {index}")]
    ChainViolation {
        kind: ChainViolationKind,
        index: usize,
    },
    #[error("rationalization budget infeasible: {0}")]
    BudgetInfeasible(String),
    #[error("common subspace mismatch: {0}")]
    ZMismatch(String),
    #[error("map is not in normalized initial position: {0}")]
    NotInitialPosition(String),
    #[error("candidate is not an object: {0}")]
    NotAnObject(String),
    #[error("generic state exhausted: {0}")]
    StateExhausted(String),
    #[error("task is not satisfied")]
    NotSatisfied,
    #[error("condition (A) check failed: {0}")]
    ConditionA(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("parse error at line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported format version {0}")]
    VersionUnsupported(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable variant name, printed on the diagnostic stream by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyInput => "EmptyInput",
            Error::NotFullDimensional => "NotFullDimensional",
            Error::Unbounded => "Unbounded",
            Error::DimensionCapExceeded { .. } => "DimensionCapExceeded",
            Error::RankDeficient => "RankDeficient",
            Error::ZeroVector => "ZeroVector",
            Error::InvalidBall(_) => "InvalidBall",
            Error::NotMonotone { .. } => "NotMonotone",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::BoundTooSmall(_) => "BoundTooSmall",
            Error::NotIsometry { .. } => "NotIsometry",
            Error::NotEpsIsometry { .. } => "NotEpsIsometry",
            Error::ChainViolation { .. } => "ChainViolation",
            Error::BudgetInfeasible(_) => "BudgetInfeasible",
            Error::ZMismatch(_) => "ZMismatch",
            Error::NotInitialPosition(_) => "NotInitialPosition",
            Error::NotAnObject(_) => "NotAnObject",
            Error::StateExhausted(_) => "StateExhausted",
            Error::NotSatisfied => "NotSatisfied",
            Error::ConditionA(_) => "ConditionA",
            Error::Certificate(_) => "CertificateFailure",
            Error::ParseError { .. } | Error::Parse(_) => "ParseError",
            Error::VersionUnsupported(_) => "VersionUnsupported",
            Error::Io(_) => "Io",
        }
    }
}
