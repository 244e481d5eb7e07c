//! Error type shared across the crate.

/// Errors surfaced by analysis, simulation, and configuration code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Constellation and parking planes precess at the same rate, so RAAN
    /// contacts never occur and the indirect strategy is undefined.
    #[error("degenerate alignment: zero relative RAAN drift between echelons")]
    DegenerateAlignment,

    #[error("time step too coarse: {0}")]
    TimeStepTooCoarse(String),

    #[error("invalid transfer: {0}")]
    InvalidTransfer(String),

    #[error("invalid propulsion: {0}")]
    InvalidPropulsion(String),

    #[error("invalid availability vector: {0}")]
    InvalidAvailability(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// The in-plane chain never places an order (`chi_0 = 1`), so the
    /// parking reorder cycle is degenerate.
    #[error("no parking demand: the in-plane echelon never orders")]
    NoDemand,

    #[error("{op} did not converge within {iterations} iterations")]
    NonConvergence { op: &'static str, iterations: usize },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
