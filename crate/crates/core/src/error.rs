use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("index {index} out of range for {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator is not Hermitian")]
    NonHermitianOperator,
    #[error("{n} qubits exceeds the cap of {cap}")]
    QubitCap { n: usize, cap: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("no decay vector for this catalog; supply one explicitly")]
    UnsupportedCatalog,
    #[error("vanishing overlap with the decay vector")]
    VanishingOverlap,
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
