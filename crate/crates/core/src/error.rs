use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid value: {0}")]
    Value(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate bone{}: joints coincide", .edge.map(|e| format!(" (edge {e})")).unwrap_or_default())]
    DegenerateBone { edge: Option<usize> },

    #[error("point is behind the camera (camera-space z = {z})")]
    BehindCamera { z: f64 },

    #[error("required shift ({dx}, {dy}) exceeds the {width}x{height} image")]
    OutOfFrame {
        dx: i64,
        dy: i64,
        width: usize,
        height: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Validation,
    Numeric,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Parse(_)
            | Error::Schema(_)
            | Error::Value(_)
            | Error::Config(_)
            | Error::EmptyInput(_) => ErrorClass::Validation,
            Error::DegenerateInput(_)
            | Error::DegenerateBone { .. }
            | Error::BehindCamera { .. }
            | Error::OutOfFrame { .. }
            | Error::Shape(_) => ErrorClass::Numeric,
        }
    }

    /// Short stable identifier for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
            Error::Schema(_) => "schema",
            Error::Value(_) => "value",
            Error::Config(_) => "config",
            Error::EmptyInput(_) => "empty_input",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::DegenerateBone { .. } => "degenerate_bone",
            Error::BehindCamera { .. } => "behind_camera",
            Error::OutOfFrame { .. } => "out_of_frame",
            Error::Shape(_) => "shape",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
