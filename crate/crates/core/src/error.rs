use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid pair descriptor: {0}")]
    InvalidPair(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("Lie algebra membership violated: {0}")]
    Membership(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
