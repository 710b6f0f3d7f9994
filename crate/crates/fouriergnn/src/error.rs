//! Crate-wide error type.

use std::fmt;

/// Errors raised by the forecasting toolkit.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input or parameter array contained a NaN or infinity.
    NonFinite { context: String },
    /// Array dimensions do not agree with the operation contract.
    ShapeMismatch { context: String },
    /// A value violates a documented precondition.
    InvalidArgument { context: String },
    /// CSV ingestion failure with the offending location.
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },
    /// A chronological split is too short to window.
    SplitTooShort { context: String },
    /// A gradient tensor went non-finite during the backward pass.
    NonFiniteGradient { tensor: String },
    /// Training loss became non-finite.
    Diverged { epoch: usize, loss: f64 },
    /// Node representation collapsed to zero; adjacency export is undefined.
    DegenerateRepresentation,
    /// Adjacency export refused: the materialized matrix would be too large.
    AdjacencyTooLarge { nodes: usize, cap: usize },
    /// Configuration file problem, keyed by the offending path.
    Config { key: String, message: String },
    /// Checkpoint serialization or deserialization failure.
    Checkpoint { message: String },
    /// Underlying I/O failure.
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { context } => write!(f, "non-finite value in {context}"),
            Error::ShapeMismatch { context } => write!(f, "shape mismatch: {context}"),
            Error::InvalidArgument { context } => write!(f, "invalid argument: {context}"),
            Error::Parse {
                path,
                row,
                column,
                message,
            } => write!(f, "{path}: row {row}, column {column}: {message}"),
            Error::SplitTooShort { context } => write!(f, "split too short: {context}"),
            Error::NonFiniteGradient { tensor } => {
                write!(f, "non-finite gradient in tensor '{tensor}'")
            }
            Error::Diverged { epoch, loss } => {
                write!(f, "training diverged at epoch {epoch} (loss = {loss})")
            }
            Error::DegenerateRepresentation => {
                write!(f, "all-zero node representation; adjacency undefined")
            }
            Error::AdjacencyTooLarge { nodes, cap } => write!(
                f,
                "refusing to materialize a {nodes}x{nodes} adjacency (cap {cap} nodes)"
            ),
            Error::Config { key, message } => write!(f, "config key '{key}': {message}"),
            Error::Checkpoint { message } => write!(f, "checkpoint: {message}"),
            Error::Io { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    pub fn shape(context: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
        }
    }

    pub fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }

    pub fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context: context.into(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, err: &std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
