use thiserror::Error;

/// Errors raised by mesh, graph, assembly and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("boundary classification failed for face {face}: {msg}")]
    Classification { face: usize, msg: String },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coefficient error: {0}")]
    Coefficient(String),

    #[error("coupling geometry error on edge {edge}: {msg}")]
    CouplingGeometry { edge: usize, msg: String },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("preconditioner error: {0}")]
    Preconditioner(String),

    #[error("factorization failed: zero pivot at column {0}")]
    ZeroPivot(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
