use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:.3e} exceeds tolerance {tolerance:.3e})")]
    NonHermitianInput { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary (max deviation of U†U from identity {deviation:.3e} exceeds {tolerance:.3e})")]
    NonUnitary { deviation: f64, tolerance: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index tuple {indices:?} out of range for dimension {dim}")]
    IndexOutOfRange { indices: [usize; 5], dim: usize },

    #[error("instance too large: {tuples} path amplitudes exceeds cap {cap}")]
    InstanceTooLarge { tuples: usize, cap: usize },

    #[error("imaginary residue {residue:.3e} of realized weights exceeds {tolerance:.3e}")]
    ResidueTooLarge { residue: f64, tolerance: f64 },

    #[error("a nonempty grid of coupling values is required")]
    NonemptyGridRequired,

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("observable is not binary: {0}")]
    NotBinary(String),

    #[error("identity {label} violated (residual {residual:.3e})")]
    IdentityViolation { label: String, residual: f64 },
}
