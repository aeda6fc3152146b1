use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical and validation failures raised by the simulator.
///
/// Parse failures of circuit files use [`crate::dsl::ParseError`] instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyShape,
    #[error("expected {rows}x{cols} = {} entries, got {len}", rows * cols)]
    EntryCount { rows: usize, cols: usize, len: usize },
    #[error("rows have different lengths")]
    RaggedRows,
    #[error("non-finite value")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix has a negative eigenvalue {value:e}")]
    NegativeEigenvalue { value: f64 },
    #[error("Jacobi eigensolver did not converge")]
    NoConvergence,
    #[error("dimension {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("density matrix is not valid: {0}")]
    InvalidDensity(String),
    #[error("invalid branch distribution: {0}")]
    InvalidDistribution(String),
    #[error("matrix {index} is not unitary")]
    NotUnitary { index: usize },
    #[error("gate has {gate} paths but the distribution has {dist} branches")]
    BranchCount { gate: usize, dist: usize },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid outcome distribution: {0}")]
    InvalidOutcomeDistribution(String),
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("Zeno schedule needs at least one repeat")]
    ZeroRepeats,
    #[error("invalid search parameters: {0}")]
    InvalidSearch(String),
    #[error("scenario {0} does not renormalize")]
    NotRenormalizing(&'static str),
    #[error("E_BACKEND_SCENARIO: backend {backend} cannot be used with scenario {scenario}")]
    BackendScenario { backend: String, scenario: String },
}
