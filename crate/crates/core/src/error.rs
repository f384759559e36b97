use std::io;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("empty image")]
    EmptyImage,
    #[error("seed mask error: {0}")]
    Seeds(String),
    #[error("malformed model: {0}")]
    Model(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("iteration limit of {0} pivots exceeded")]
    IterationLimit(u64),
    #[error("cutting-plane pass limit of {0} exceeded")]
    PassLimit(usize),
    #[error("inpainting error: {0}")]
    Inpaint(String),
    #[error("MPS format error: {0}")]
    Mps(String),
    #[error("PNM format error: {0}")]
    Pnm(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
