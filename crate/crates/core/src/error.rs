use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// `e^{-tψ}` is not integrable (or decays too slowly) at the requested time.
    #[error("density possibly unbounded/non-integrable at t = {t}: {detail}")]
    Integrability { t: f64, detail: String },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residuals {residuals:?})")]
    Convergence { iterations: usize, residuals: Vec<f64> },

    #[error("window error: {0}")]
    Window(String),

    #[error("function is not subaveraging: min defect {min_defect:e} at t = {t}")]
    NotSubaveraging { t: f64, min_defect: f64 },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("insufficient statistics at x = {x:?}: {hits} paths landed in the reference set")]
    InsufficientStatistics { x: Vec<f64>, hits: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
