use thiserror::Error;

/// Errors raised by the library. Condition violations found by the
/// verification routines are reported through their report types instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("degenerate unit effect: minimum unit pairing {lambda_min:e} on the reachable cone")]
    DegenerateUnit { lambda_min: f64 },

    #[error("zero-probability branch after outcome prefix {prefix:?} (p = {probability:e})")]
    ZeroProbabilityBranch { prefix: Vec<usize>, probability: f64 },

    #[error("no relabelling attains the CHSH value {target} (best {best})")]
    ConditionViolated { target: f64, best: f64 },

    #[error("ambiguous correction: {count} relabellings attain the CHSH value {target}")]
    AmbiguousCorrection { target: f64, count: usize },

    #[error("bipartite state map is not invertible (rank {rank} of {dim}); reduce the instance first")]
    NotInvertible { rank: usize, dim: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("enumeration bound n_max = {n_max} too small: solution {witness:?} touches the boundary")]
    BoundTooSmall { n_max: u32, witness: Vec<u32> },

    #[error("not a character: {0}")]
    NotACharacter(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
