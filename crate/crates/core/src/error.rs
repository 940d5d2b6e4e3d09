//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or degenerate input data.
    #[error("data error: {0}")]
    Data(String),

    #[error("data error: {axis} margin for label `{label}` (index {index}) is zero")]
    ZeroMargin {
        axis: Axis,
        index: usize,
        label: String,
    },

    /// Invalid argument supplied by the caller.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("undefined correlation: informedness {informedness} and markedness {markedness} have opposite signs")]
    UndefinedCorrelation { informedness: f64, markedness: f64 },

    #[error("p = {0} is outside the calibration range (0, 1/e)")]
    OutOfCalibrationRange(f64),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Predicted labels.
    Row,
    /// Real classes.
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => f.write_str("row (bias)"),
            Axis::Column => f.write_str("column (prevalence)"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
