use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected} sub-carriers, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The jamming energy demanded by the dual solution cannot be harvested
    /// with the power left after information transfer.
    #[error("p_PT recovery infeasible: jamming needs {required:.6e} J, at most {available:.6e} J harvestable")]
    RecoveryInfeasible { required: f64, available: f64 },

    #[error("grid too large: {points} points exceeds cap of {cap}")]
    GridTooLarge { points: u128, cap: u128 },

    #[error("config error: {0}")]
    Config(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("malformed channel file at line {line}: {msg}")]
    ChannelFormat { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
