use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A dimension argument is outside the supported range.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    /// `‖U†U − I‖` exceeded the structural tolerance.
    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("operators are not trace-orthogonal (max Gram deviation {deviation:.3e})")]
    NotOrthogonal { deviation: f64 },

    #[error("vectors are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("state is not normalized (norm {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("Kraus operators are not trace preserving (max deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("mixing matrix is not an isometry (max deviation {deviation:.3e})")]
    NonIsometric { deviation: f64 },

    /// The operator is not mapped onto a multiple of itself by the
    /// two-time observable.
    #[error("operator is not an eigenoperator of the two-time observable")]
    NotAnEigenoperator,

    #[error("basis is not of product form U0·σ for the requested measurement circuit: {0}")]
    NotProductBasis(String),

    /// A Bell-family vector has a marginal away from `I/d`.
    #[error("state is not maximally entangled (marginal deviation {deviation:.3e})")]
    NotMaximallyEntangled { deviation: f64 },

    #[error("operator lies outside the support of the map: {0}")]
    OutsideSupport(String),

    #[error("ancilla basis does not induce the claimed Kraus representation: {0}")]
    RepresentationMismatch(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("coefficients not normalized: |alpha|^2 + |beta|^2 = {0:.12}")]
    NotNormalizedCoefficients(f64),

    #[error("size {n} out of range for {mode} (max {max})")]
    SizeOutOfRange { n: usize, max: usize, mode: &'static str },

    #[error("unknown name '{0}'")]
    UnknownName(String),

    #[error("cannot read '{path}': {message}")]
    Io { path: String, message: String },

    /// Malformed input files.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
