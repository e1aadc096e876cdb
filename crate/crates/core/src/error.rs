use thiserror::Error;

/// Errors raised by the gate library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested gate or parameter set cannot be realized.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A configuration file or value could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
