use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |A - A^dag| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (max |U^dag U - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),

    #[error("space layouts differ: {0}")]
    SpecMismatch(String),

    #[error("invalid space layout: {0}")]
    InvalidSpace(String),

    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid probability table: {0}")]
    InvalidProbabilities(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("algebra is not commutative (max commutator entry {residual:e})")]
    NonCommutative { residual: f64 },

    #[error("algebra does not contain the identity")]
    NotUnital,

    #[error("observable lies outside the algebra span (residual {residual:e})")]
    OutsideAlgebra { residual: f64 },

    #[error("invalid branch index {0}, expected 1 or 2")]
    InvalidBranch(usize),

    #[error("invalid measurement model: {0}")]
    InvalidModel(String),

    #[error("interaction duration is zero but the coupling is not the identity")]
    DegenerateDuration,

    #[error("too few events for a statistical test: {found} < {required}")]
    InsufficientEvents { found: u64, required: u64 },
}
