use thiserror::Error;

use crate::jet::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate metric at {at:?}: det = {det:e}")]
    DegenerateMetric { at: Point, det: f64 },

    #[error("frame error: {0}")]
    Frame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("evaluation error{}: {message}", offset.map(|o| format!(" at offset {o}")).unwrap_or_default())]
    Evaluation {
        message: String,
        offset: Option<usize>,
    },

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
