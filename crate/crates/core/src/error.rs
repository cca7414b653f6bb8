use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("{func}: argument {arg} outside the domain ({reason})")]
    Domain {
        func: &'static str,
        arg: f64,
        reason: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A (set, scheme) or (exponent, dimension) pairing that is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The equilibrium measure is not unique in this regime.
    #[error("equilibrium measure is not unique for p = {p}: {description}")]
    NonUnique { p: f64, description: String },

    /// The discrete minimization collapsed onto a single node.
    #[error("degenerate minimizer: {0}")]
    Degenerate(String),

    #[error("set description: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
