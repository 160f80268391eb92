use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid of {m} points aliases modes up to {n_max} (need at least {required})")]
    Aliasing { m: usize, n_max: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature node coincides with the kernel singularity")]
    SingularNode,

    #[error("non-finite integrand sample at node {0}")]
    NonFinite(usize),

    #[error("degenerate curve: min(1 + f) = {min_radius:.3e}")]
    DegenerateCurve { min_radius: f64 },

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("Newton normalization did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("kernel denominator {value:.3e} below floor")]
    DenominatorFloor { value: f64 },

    #[error("Neumann series diverged after {iterations} terms (increment {increment:.3e})")]
    VorticityDivergence { iterations: usize, increment: f64 },

    #[error("singular collocation matrix (smallest pivot {pivot:.3e})")]
    SingularMatrix { pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("step rejected after {halvings} halvings at t = {t}: {reason}")]
    StepRejected { halvings: u32, t: f64, reason: String },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
