//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by network sampling, problem construction, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("singular matrix ({context}): {detail}")]
    Singular { context: String, detail: String },

    /// The receive filter annihilated the desired signal (e.g. a zero-forcing
    /// projector orthogonal to the own-link channel).
    #[error("degenerate receiver on primary link {link}")]
    DegenerateReceiver { link: usize },

    #[error("zero signal: the secondary channel maps the beamformer to zero")]
    ZeroSignal,

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A state the underlying theory rules out was reached numerically,
    /// e.g. a negative discriminant in the two-form decomposition.
    #[error("internal contradiction: {0}")]
    InternalContradiction(String),

    #[error("numerical trouble: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
