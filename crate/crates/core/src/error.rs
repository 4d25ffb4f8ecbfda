use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frequency grid does not cover indices [{needed_lo}, {needed_hi}) (have [{have_lo}, {have_hi}))")]
    GridCoverage {
        needed_lo: i64,
        needed_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("{method} did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailed {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("norm estimate not converged after {iterations} iterations (best estimate {estimate:.6e}, relative residual {residual:.3e})")]
    NormNotConverged {
        estimate: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("map and adjoint are inconsistent (relative mismatch {0:.3e})")]
    InconsistentAdjoint(f64),

    #[error("eigensolver did not converge: {0}")]
    EigenNotConverged(String),

    #[error("window endpoint {endpoint} lies within {margin:.1e} of eigenvalue {eigenvalue}")]
    WindowTouchesSpectrum {
        endpoint: f64,
        eigenvalue: f64,
        margin: f64,
    },

    #[error("empty set")]
    EmptySet,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
