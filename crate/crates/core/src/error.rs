use thiserror::Error;

/// Errors produced by the simulation kernel and the physics modules built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is not a positive power of two")]
    BadDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |m - m^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not unitary (max |u^dagger u - 1| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("density operator has trace {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("state is orthogonal to the decoherence-free subspace")]
    OutsideSubspace,

    #[error("measurement setting {found} does not match the required setting {expected}")]
    WrongSetting { expected: String, found: String },

    #[error("post-selection kept no amplitude")]
    EmptyProjection,

    #[error(
        "post-selected state mixes {0} distinguishable pulse assignments; resolve them per pulse"
    )]
    Distinguishable(usize),

    #[error("mode {0} is already occupied")]
    ModeOccupied(String),

    #[error("{name} = {value} is out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),

    #[error("count record is empty")]
    ZeroCounts,

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
