use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The scenario is self-consistent but numerically degenerate
    /// (e.g. demand at the cell edge exceeds 10^6 subcarriers).
    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    /// A numerical routine finished without reaching its accuracy target.
    #[error("accuracy warning: {0}")]
    Accuracy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
