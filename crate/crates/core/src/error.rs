use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable index must be at least 1 (position {position})")]
    ZeroVariable { position: usize },

    #[error("invalid bit string {0:?}")]
    BitString(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("formula leaf x{index} is out of range for arity {arity}")]
    LeafOutOfRange { index: usize, arity: usize },

    #[error("formula is not read-once: {0}")]
    NotReadOnce(String),

    #[error("bit index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("block {block} ({bits}) is outside the domain of its inner function")]
    OutsideInnerDomain { block: usize, bits: String },

    #[error("input {0} is outside the function domain")]
    OutsideDomain(String),

    #[error("size cap exceeded: arity {arity} > {cap}")]
    SizeCap { arity: usize, cap: usize },

    #[error("unknown function family {0:?}")]
    UnknownFamily(String),

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix has a negative entry at ({row}, {col})")]
    Negative { row: usize, col: usize },

    #[error("eigensolver did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("invalid cost vector: {0}")]
    InvalidCost(String),

    #[error("invalid adversary matrix: {0}")]
    InvalidAdversary(String),

    #[error("invalid minimax witness: {0}")]
    InvalidWitness(String),

    #[error("eigenvector half-mass invariant violated: |half0|^2 = {half0}, |half1|^2 = {half1}")]
    HalfMass { half0: f64, half1: f64 },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("json: {0}")]
    Json(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
