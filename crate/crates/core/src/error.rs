use thiserror::Error;

/// Errors produced by the operator, divergence, channel and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A*| = {deviation:e} exceeds {tolerance:e}")]
    NonHermitianInput { deviation: f64, tolerance: f64 },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPositive { eigenvalue: f64, tolerance: f64 },

    #[error("H is not positive: eigenvalue {eigenvalue:e}")]
    NonPositiveH { eigenvalue: f64 },

    #[error("matrix is not a projector: {reason}")]
    NotAProjector { reason: String },

    #[error("matrix is not an isometry: |V*V - I| = {deviation:e}")]
    NotAnIsometry { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative input {0} (domain is [0, inf))")]
    NegativeInput(f64),

    #[error("value {0} is below the extended non-negative range")]
    NegativeValue(f64),

    #[error("base divergence D(rho||sigma) is +inf")]
    InfiniteBase,

    #[error("identity is indeterminate: term `{term}` is +inf")]
    IndeterminateIdentity { term: String },

    #[error("invalid quantum operation (defect {defect:e})")]
    InvalidOperation { defect: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("threshold {threshold:e} (m = {m}) collides with eigenvalue {eigenvalue:e} of sigma_{n}")]
    ThresholdCollision {
        m: usize,
        n: usize,
        threshold: f64,
        eigenvalue: f64,
    },

    #[error("family has no term for n = {0}")]
    MissingTerm(usize),

    #[error("divergence at the limit pair is +inf")]
    InfiniteLimitDivergence,

    #[error("Dini hypothesis violated: {condition}")]
    HypothesisViolation { condition: String },

    #[error("sigma does not commute with the projector (|[P, sigma]| = {commutator:e})")]
    NonCommutingSigma { commutator: f64 },

    #[error("unitary does not fix sigma (|U sigma U* - sigma| = {deviation:e})")]
    SymmetryViolation { deviation: f64 },

    #[error("ladder is inconsistent with the sequence: {condition} fails")]
    LadderInconsistent { condition: String },

    #[error("ladder construction failed: {0}")]
    LadderConstructionFailure(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
