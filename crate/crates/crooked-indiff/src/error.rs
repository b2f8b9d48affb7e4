//! Error taxonomy shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Width or index outside a table's domain, malformed inputs.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive mode was requested beyond its size cap.
    #[error("size cap exceeded: {0}")]
    Size(String),

    /// A query budget (q1, q2, tau) was exhausted.
    #[error("query budget exceeded: {0}")]
    Budget(String),

    /// A convention of the model was violated (duplicate transcript point,
    /// duplicate batch message, first-query rule, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The simulator graph lost an invariant (no marked predecessor, ...).
    #[error("graph corruption: {0}")]
    Graph(String),

    /// Capacity-exclusion list is full; the node sampler returns bottom.
    #[error("saturated: {0}")]
    Saturated(String),

    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
