use thiserror::Error;

/// Errors produced by the risk engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data (samples, matrices, networks) is malformed.
    #[error("invalid input: {0}")]
    Input(String),

    /// Configuration is inconsistent (dimensions, group sizes, schema).
    #[error("configuration error: {0}")]
    Config(String),

    /// A model failed validation, e.g. an inverse demand function violating
    /// the uniqueness assumption.
    #[error("model error: {0}")]
    Model(String),

    /// Scenario generation produced non-finite values.
    #[error("generation error: {0}")]
    Generation(String),

    /// A root bracket could not be found.
    #[error("divergence: {0}")]
    Divergence(String),

    /// A fixed-point iteration did not converge.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// Numeric overflow while evaluating a model.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The grid box is fully acceptable or fully unacceptable.
    #[error("degenerate box: {0}")]
    DegenerateBox(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for this error: 2 for configuration and model
    /// validation failures, 3 for numerical non-convergence, 4 for a
    /// degenerate grid box, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Input(_) | Error::Config(_) | Error::Model(_) => 2,
            Error::Convergence { .. } | Error::Divergence(_) => 3,
            Error::DegenerateBox(_) => 4,
            _ => 1,
        }
    }
}
