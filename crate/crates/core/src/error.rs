use thiserror::Error;

/// Errors produced by the core pipeline stages.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("x{index} = {value} is outside the bound [{lo}, {hi}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unknown problem '{name}'; available: {available}")]
    UnknownProblem { name: String, available: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("model normalization is not fitted; train or load the model first")]
    NotFitted,

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("hyperparameter search failed: {0}")]
    SearchFailed(String),

    #[error("swarm evaluation produced a non-finite value for particle {particle} at iteration {iteration}")]
    NonFiniteEvaluation { particle: usize, iteration: usize },

    #[error(
        "population of {population} is too small for the required {needed} samples; enlarge the optimization run"
    )]
    InsufficientPopulation { population: usize, needed: usize },

    #[error("malformed data: {0}")]
    MalformedData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
