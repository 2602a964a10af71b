use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("coupling undefined on the diagonal: sites {i} and {j} coincide modulo {n}")]
    Diagonal { i: usize, j: usize, n: usize },

    #[error("configuration {bits:#x} has {found} particles, sector requires {expected}")]
    OutOfSector {
        bits: u64,
        found: u32,
        expected: u32,
    },

    #[error("index {index} out of range for sector of dimension {dim}")]
    IndexOutOfRange { index: u64, dim: u64 },

    #[error("illegal hop {from} -> {to}: {reason}")]
    IllegalMove {
        from: usize,
        to: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("memory budget exceeded: need about {required} bytes, budget is {budget} bytes")]
    Resource { required: u64, budget: u64 },

    #[error("eigensolver did not converge after {iterations} matrix-vector products; best residuals {residuals:?}")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("dense eigendecomposition failed")]
    Decomposition,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
