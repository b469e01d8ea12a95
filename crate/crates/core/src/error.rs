use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate geometry in cell {cell}: {msg}")]
    DegenerateGeometry { cell: usize, msg: String },

    #[error("quadrature failure: {0} (run mesh diagnostics to locate non star-shaped cells)")]
    Quadrature(String),

    #[error("operator/shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("singular local system: {0}")]
    Singular(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
