use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("beta `{name}` evaluated at negative or non-finite argument t = {t}")]
    BetaDomain { name: String, t: f64 },

    #[error("beta `{name}` returned {value} at t = {t}, outside [0, 1)")]
    BetaCodomain { name: String, t: f64, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("section failed at step {step}: H(section(y)) is {residual} away from y")]
    SectionFailure { step: usize, residual: f64 },

    #[error("grid mismatch: {left} nodes vs {right} nodes (or differing node positions)")]
    GridMismatch { left: usize, right: usize },

    #[error("kernel produced a non-finite value at t = {t}, s = {s}, u = {u}")]
    NonFiniteKernel { t: f64, s: f64, u: f64 },

    #[error("invalid finite model: {0}")]
    InvalidModel(String),

    #[error("iterates lost pointwise monotonicity at step {step}")]
    OrderViolation { step: usize },

    #[error("contraction inequality failed along the trace at step {step}")]
    ContractionViolation { step: usize },

    #[error("no convergence after {iterations} iterations (last step distance {last_step})")]
    NotConverged { iterations: usize, last_step: f64 },

    #[error("converged iterate is not a common fixed point: residuals f = {residual_f}, g = {residual_g}")]
    ResidualTooLarge { residual_f: f64, residual_g: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
