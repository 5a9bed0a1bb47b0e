use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: face has {count} vertices, only triangles are supported")]
    NonTriangleFace {
        path: PathBuf,
        line: usize,
        count: usize,
    },

    #[error("{path}:{line}: face vertex lacks a texture coordinate")]
    MissingUv { path: PathBuf, line: usize },

    #[error("{path}:{line}: face vertex lacks a normal")]
    MissingNormal { path: PathBuf, line: usize },

    #[error("scene contains no triangles")]
    EmptyScene,

    #[error("triangle {index} is degenerate (zero world-space area)")]
    DegenerateTriangle { index: usize },

    #[error("invalid material {name:?}: {reason}")]
    InvalidMaterial { name: String, reason: String },

    #[error("unknown material {name:?}")]
    UnknownMaterial { name: String },

    #[error("UV overlap: triangles {first} and {second} both cover texel ({x}, {y})")]
    UvOverlap {
        first: usize,
        second: usize,
        x: u32,
        y: u32,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("resolution mismatch: {left:?} vs {right:?}")]
    ResolutionMismatch { left: (u32, u32), right: (u32, u32) },

    #[error("bad file format: {0}")]
    Format(String),

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("too many patches for the dense solver: {count} > {limit}")]
    TooManyPatches { count: usize, limit: usize },

    #[error("{0}")]
    Image(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
