use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed to reach tolerance (estimate {estimate:e}, error {error:e})")]
    IntegrationFailure { estimate: f64, error: f64 },

    #[error("could not bracket quantile for probability {q}")]
    RootBracketFailure { q: f64 },

    #[error("too few observations: got {got}, need at least {required}")]
    TooFewObservations { got: usize, required: usize },

    #[error("degenerate spread: interquartile range is zero")]
    DegenerateSpread,

    #[error("L-moment solver failed (l2 = {l2}, t3 = {t3}, t4 = {t4}): {reason}")]
    SolverFailure {
        l2: f64,
        t3: f64,
        t4: f64,
        reason: String,
    },

    #[error("empty support: no bin carries empirical mass")]
    EmptySupport,

    #[error("model assigns zero probability to bin {bin} that carries empirical mass")]
    SupportMismatch { bin: usize },
}
