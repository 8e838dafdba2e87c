use thiserror::Error;

/// Errors produced by the simulation, fitness and optimizer layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    /// Exhaustive enumeration would exceed the configured cap.
    #[error("enumerating {branches} branches (2^{depth}) exceeds the cap of depth {cap}")]
    Resource { depth: usize, branches: u128, cap: usize },

    /// The fitness function produced a NaN during a swarm round.
    #[error("fitness of particle {particle} is NaN at position {position:?}")]
    NanFitness { particle: usize, position: Vec<f64> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
