use thiserror::Error;

/// Errors surfaced by the library. The CLI maps `InvalidConfig`-like
/// variants to exit code 2 and `Numerical` to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid reward: {0}")]
    InvalidReward(String),

    #[error("trajectory is malformed: {0}")]
    MalformedTrajectory(String),

    #[error("permutation is not a valid anchored ordering: {0}")]
    InvalidPermutation(String),

    #[error("reward does not expose a state-level view; the state-dependent bound needs a time-invariant reward")]
    RewardNotTimeInvariant,

    #[error("reward of arbitrary kind carries no (submodular, supermodular) decomposition")]
    MissingDecomposition,

    #[error("operation requires deterministic dynamics (stochasticity degree 0 and a point-mass initial distribution)")]
    RequiresDeterministic,

    #[error("enumeration budget exceeded: needs at least {required} trajectories, budget is {budget}")]
    EnumerationBudget { required: usize, budget: usize },

    #[error("curvature is undefined: every ground element was skipped as uninformative (0/0)")]
    UndefinedCurvature,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
