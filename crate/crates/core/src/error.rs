// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node `{label}` is not allowed")]
    SelfLoop { line: usize, label: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unknown node label `{0}`")]
    UnknownLabel(String),

    /// `delta * lambda_max` is not safely below one.
    #[error(
        "spectral condition violated: delta = {delta} with lambda_max = {lambda_max}; \
         delta must be below {max_delta}"
    )]
    SpectralCondition {
        lambda_max: f64,
        delta: f64,
        max_delta: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("illegal intervention on ({i}, {j}): {reason}")]
    IllegalIntervention {
        i: String,
        j: String,
        reason: String,
    },

    /// A system that certification guarantees to be nonsingular failed to solve.
    #[error("singular system despite certification: {0}")]
    Singular(String),

    #[error("search space of {subsets} subsets exceeds the cap of {cap}; use greedy mode")]
    EnumerationCap { subsets: u128, cap: u128 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Failures that indicate a defect in this library rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Singular(_) | Error::Invariant(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
