use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("empty event expression")]
    EmptyExpression,

    #[error("variable `{0}` is missing from the truth assignment")]
    MissingVariable(String),

    #[error("joint support has {size} variables, above the enumeration cap of {cap}")]
    SupportTooLarge { size: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weight at index {index} must be positive and finite, got {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("non-finite input at index {0}")]
    NonFinite(usize),

    #[error("projection solver failed: KKT residual {residual:e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("no convergence after {sweeps} sweeps (last residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("probability {value} is outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    #[error("no forecasts")]
    NoForecasts,

    #[error("unknown subset strategy `{0}`")]
    UnknownStrategy(String),

    #[error("unknown projection method `{0}`")]
    UnknownMethod(String),

    #[error("subset design leaves entry {0} uncovered")]
    UncoveredEntry(usize),

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("forecast of `{0}` has no truth value")]
    MissingTruth(String),

    #[error("slope undefined: {true_count} of {total} events are true")]
    UndefinedSlope { true_count: usize, total: usize },

    #[error("conflicting truth values for event `{0}`")]
    ConflictingTruth(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("row {row}: {message}")]
    Format { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
