use thiserror::Error;

/// Errors surfaced by the solvers and the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of a routine, for example a
    /// non-positive conformal factor or a point outside the grid.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Boundary data too large for the small-data theory to apply.
    #[error("boundary data outside the small-data regime: surrogate norm {norm:.3e} exceeds bound {bound:.3e}")]
    SmallDataRegime { norm: f64, bound: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (last residual {last:.3e}): {reason}")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
        reason: String,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("singular discrete operator: {0}")]
    Singular(String),

    /// A forward solve inside a divided difference failed. The level and the
    /// sign vector identify the offending evaluation.
    #[error("divided difference at eps = {eps:e}, signs {signs:?}: {source}")]
    DividedDifference {
        eps: f64,
        signs: Vec<i8>,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(e: toml::ser::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for building a [`Error::Domain`].
pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
