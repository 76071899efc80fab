use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("coefficient {0} has zero norm; scaling undefined")]
    ZeroCoefficientNorm(&'static str),

    #[error("all coefficient matrices are zero")]
    EmptyPattern,

    #[error("matrix is not rank deficient (rank {rank} of {n})")]
    RankNotDeficient { rank: usize, n: usize },

    #[error("singular pencil detected at {stage}: strip {rows}x{cols} has rank {rank}")]
    SingularPencil {
        stage: String,
        rows: usize,
        cols: usize,
        rank: usize,
    },

    #[error("eigensolver backend failure: {0}")]
    BackendFailure(String),

    #[error("vector is zero")]
    ZeroVector,

    #[error("backward error denominator is zero")]
    ZeroDenominator,

    #[error("componentwise backward error is undefined for an infinite eigenvalue")]
    InfiniteValueUnsupported,
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
