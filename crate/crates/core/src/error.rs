use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("cell {cell}: {reason}")]
    BadCell { cell: usize, reason: String },
    #[error("malformed mesh: {0}")]
    Structure(String),
    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("requested exactness {requested} exceeds the maximum supported degree {max}")]
    DegreeTooHigh { requested: usize, max: usize },
    #[error("star point is not in the kernel of the cell (fan triangle {triangle} has area {area:e})")]
    StarPointOutsideKernel { triangle: usize, area: f64 },
}

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("{what} system is singular")]
    Singular { what: &'static str },
    #[error(
        "P_(k,l) Gram matrix is numerically rank deficient (rank {rank} of {dim}); \
         increase l or repair the cell"
    )]
    RankDeficient { rank: usize, dim: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("cell {cell}: {source}")]
    Element {
        cell: usize,
        #[source]
        source: ProjectionError,
    },
    #[error("cell {cell}: local stiffness kernel has dimension {dim}, expected 1")]
    KernelDimension { cell: usize, dim: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix dimensions do not match: {0}")]
    Dimension(String),
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("eigen decomposition failed: {0}")]
    Decomposition(String),
    #[error("Arnoldi iteration did not converge after {restarts} restarts (residuals {residuals:?})")]
    NotConverged { restarts: usize, residuals: Vec<f64> },
}

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown or unsupported case: {0}")]
    UnknownCase(String),
    #[error("invalid study configuration: {0}")]
    Config(String),
    #[error("level n = {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Study(#[from] StudyError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
