//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("field length {got} does not match grid cell count {expected}")]
    FieldLength { expected: usize, got: usize },

    #[error("kernel error: {0}")]
    Kernel(String),

    #[error(
        "boundary mass overshoots 1 by {overshoot:.3e} (tolerance 1e-6): kernel under-resolved by the grid"
    )]
    QuadratureOvershoot { overshoot: f64 },

    #[error("backend error: {0}")]
    Backend(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("resource support covers only {cells} cells (minimum {min}): under-resolved")]
    SupportUnderResolved { cells: usize, min: usize },

    #[error("resource support does not fit inside the domain")]
    SupportOutsideDomain,

    #[error("no positive steady state: mu0 = {mu0:.6e} <= 0")]
    NoPositiveSteadyState { mu0: f64 },

    #[error(
        "fixed-point solver did not converge in {iterations} iterations (last change {last_change:.3e}, residual {residual:.3e})"
    )]
    SolverNonConvergence {
        iterations: usize,
        last_change: f64,
        residual: f64,
    },

    #[error(
        "monotone iteration violated (component rose by {rise:.3e} at iteration {iteration}): numerical fault"
    )]
    MonotonicityFault { iteration: usize, rise: f64 },

    #[error("time step {dt:.3e} violates the stability bound {bound:.3e}")]
    StabilityBound { dt: f64, bound: f64 },

    #[error("negative state encountered at t = {t:.6}: aborting evolution")]
    NegativeState { t: f64 },

    #[error(
        "power iteration did not converge in {iterations} iterations (mu0 estimate {mu0:.6e}, residual {residual:.3e})"
    )]
    EigenNonConvergence {
        iterations: usize,
        mu0: f64,
        residual: f64,
    },

    #[error("sweep aborted at d = {d} after {completed} completed solves: {cause}")]
    SweepAborted {
        d: f64,
        completed: usize,
        cause: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 solver, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::NoPositiveSteadyState { .. }
            | Error::SolverNonConvergence { .. }
            | Error::MonotonicityFault { .. }
            | Error::StabilityBound { .. }
            | Error::NegativeState { .. }
            | Error::EigenNonConvergence { .. }
            | Error::SweepAborted { .. } => 3,
            _ => 1,
        }
    }
}
