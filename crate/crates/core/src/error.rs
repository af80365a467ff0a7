//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the library.
///
/// `InvalidArgument` flags inputs that violate a documented precondition
/// (out-of-range angles, dimension mismatches, malformed operators). The
/// remaining variants are domain conditions that can only be diagnosed while
/// computing: conditioning on an outcome of zero probability, the single
/// degenerate knob combination `epsilon = 1, alpha = 0`, an empty conditioned
/// sample, or asking to classify a parameter vector that does not solve the
/// constraint system.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate conditioning: {0}")]
    DegenerateConditioning(String),
    #[error("degenerate setting: {0}")]
    DegenerateSetting(String),
    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),
    #[error("not a solution: {0}")]
    NotASolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
