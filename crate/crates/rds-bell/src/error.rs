//! Error types for the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A density matrix failed validation (hermiticity, trace, or positivity).
    #[error("invalid two-qubit state: {0}")]
    InvalidState(String),

    /// A parameter that must be a probability fell outside [0, 1].
    #[error("{name} = {value} is not a probability in [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    /// A settings list had the wrong length or mismatched sides.
    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    /// A root finder could not bracket a sign change.
    #[error("bisection bracket failure: {0}")]
    NoBracket(String),

    /// Configuration rejected before running (bad flag combination, bad file).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
