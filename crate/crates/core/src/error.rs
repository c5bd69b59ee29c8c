use thiserror::Error;

/// Errors raised by the library. Every variant names the operation that
/// failed and, where one exists, a witness location.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: degenerate curve: {reason}")]
    DegenerateCurve { op: &'static str, reason: String },

    #[error("{op}: point ({x}, {y}) lies on the trace (distance {distance} <= {tol})")]
    PointOnTrace { op: &'static str, x: f64, y: f64, distance: f64, tol: f64 },

    #[error("extract_level_set: level t = {t} is not closed inside the grid (superlevel set reaches the border near ({x}, {y}))")]
    OpenContour { t: f64, x: f64, y: f64 },

    #[error("{op}: offset would be singular: 1 + delta*k = {factor} < {margin} at sample {sample} ({x}, {y})")]
    OffsetSingularity { op: &'static str, factor: f64, margin: f64, sample: usize, x: f64, y: f64 },

    #[error("relaxed_energy_cusped: bridge {pair} crosses arc {arc} near ({x}, {y})")]
    BridgeCrossing { pair: usize, arc: usize, x: f64, y: f64 },

    #[error("compare_candidates: no candidate belongs to the admissible class ({count} rejected)")]
    NoValidCandidate { count: usize },

    #[error("{op}: invalid argument: {reason}")]
    InvalidArgument { op: &'static str, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(op: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { op, reason: reason.into() }
    }

    pub(crate) fn degenerate(op: &'static str, reason: impl Into<String>) -> Self {
        Error::DegenerateCurve { op, reason: reason.into() }
    }

    /// True for failures of a well-formed computation (as opposed to bad input).
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::OpenContour { .. }
                | Error::OffsetSingularity { .. }
                | Error::BridgeCrossing { .. }
                | Error::NoValidCandidate { .. }
                | Error::PointOnTrace { .. }
                | Error::DegenerateCurve { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
