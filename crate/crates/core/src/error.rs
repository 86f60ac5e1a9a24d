use thiserror::Error;

/// Errors produced by the solvers and bound estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field length {got} does not match grid interior size {expected}")]
    FieldLength { expected: usize, got: usize },

    #[error("linear solve failed: zero pivot at row {row} (pivot ratio estimate {condition_estimate:.3e})")]
    SingularMatrix { row: usize, condition_estimate: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error(
        "Neumann-Neumann iteration did not converge after {iterations} iterations \
         (increments |dg| = {g_increment:.3e}, |dh| = {h_increment:.3e})"
    )]
    NeumannNeumannDiverged {
        iterations: usize,
        g_increment: f64,
        h_increment: f64,
    },

    #[error("propagator failed on time slice {slice}: {source}")]
    Slice {
        slice: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate trajectory: {0}")]
    DegenerateTrajectory(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be a positive finite number, got {value}"),
        })
    }
}
