use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("argument {value} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("no ground state: {0}")]
    NoGroundState(String),

    #[error("tail fit failed: residual {residual:.3e} exceeds {tolerance:.3e}")]
    TailFitFailed { residual: f64, tolerance: f64 },

    #[error("{what} did not converge (residual {residual:.3e})")]
    Numeric { what: String, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("linear solve stagnated after {iterations} iterations (residual {:.3e})", history.last().copied().unwrap_or(f64::NAN))]
    LinearSolve { iterations: usize, history: Vec<f64> },

    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(String),

    #[error("singular Jacobian near a bifurcation: {0}")]
    NearBifurcation(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("subsolution search failed: {0}")]
    SubsolutionSearch(String),

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unsupported dimension d = {0}")]
    UnsupportedDimension(usize),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn numeric(what: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            what: what.into(),
            residual,
        }
    }
}
