use thiserror::Error;

use crate::coefficients::CoefficientError;
use crate::diagnostics::DiagnosticsRecord;

#[derive(Debug, Error)]
pub enum ElhError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Coefficients(#[from] CoefficientError),
    #[error("time step {dt} exceeds the stability limit {limit} ({reason})")]
    Cfl { dt: f64, limit: f64, reason: String },
    #[error("blow-up at t = {t}: {reason}")]
    BlowUp {
        t: f64,
        reason: String,
        last: Option<Box<DiagnosticsRecord>>,
    },
    #[error("picard iteration did not converge in {iters} iterations; residuals {history:?}")]
    PicardDiverged { iters: usize, history: Vec<f64> },
    #[error("initial data: {0}")]
    InitialData(String),
    #[error("diagnostics: {0}")]
    Diagnostics(String),
    #[error("config errors:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
