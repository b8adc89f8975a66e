use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{path}: unsupported MSH format version {version} (only ASCII 4.1 is read)")]
    UnsupportedVersion { path: PathBuf, version: String },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate cell {cell} (jacobian determinant {det:e})")]
    DegenerateCell { cell: usize, det: f64 },

    #[error("quadrature of order {order} cannot integrate a kernel of degree {degree} exactly")]
    UnderIntegrated { order: usize, degree: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("GMRES breakdown at iteration {iteration}: singular Hessenberg matrix")]
    Breakdown { iteration: usize },

    #[error("algebraic multigrid coarsening stagnated at level {level} ({fine} -> {coarse} unknowns)")]
    AmgStagnation { level: usize, fine: usize, coarse: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("sub-solver `{block}` failed: {source}")]
    SubSolver {
        block: String,
        #[source]
        source: Box<Error>,
    },

    #[error("newton iteration {iteration}: {source}")]
    Newton {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("linear solve stopped after {iterations} iterations at relative residual {relative_residual:e}")]
    LinearSolve { iterations: usize, relative_residual: f64 },

    #[error("invalid solver tree: {0}")]
    InvalidTree(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn in_block(self, block: &str) -> Self {
        Error::SubSolver { block: block.to_string(), source: Box::new(self) }
    }
}
