use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("coordinate length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("root {root} pairs to zero with theta_D (malformed catalog data)")]
    DegenerateRoot { root: String },

    #[error("catalog cross-check failed: {0}")]
    CatalogMismatch(String),

    #[error("2*alpha = {0} is not an integer")]
    NonIntegerExponent(String),

    #[error("ODE domain violation: {0}")]
    Domain(String),

    #[error("step size underflow at x = {at}")]
    StepUnderflow { at: f64 },

    #[error("no shooting bracket: {0}")]
    NoBracket(String),

    #[error("condition d violated: {0}")]
    ConditionDViolated(String),

    #[error("case excluded: {0}")]
    Excluded(String),

    #[error("shooting did not converge: {0}")]
    NotConverged(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
