use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("columns are numerically rank deficient (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("operator is numerically singular: min |eigenvalue| = {min_abs:e} <= threshold {threshold:e}")]
    SingularOperator { min_abs: f64, threshold: f64 },

    #[error("subspaces are not graph representable: ‖P_V − P_W‖ = {sin} is not below 1")]
    NotGraphRepresentable { sin: f64 },

    #[error("a + b|A| is numerically singular (min eigenvalue {min:e})")]
    DegenerateBound { min: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("eigenvalue {eigenvalue} lies inside the window ({alpha}, {beta})")]
    WindowNotInResolvent { eigenvalue: f64, alpha: f64, beta: f64 },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("gap condition failed: η = {eta} is not below {limit}")]
    GapConditionFailed { eta: f64, limit: f64 },

    #[error("internal contradiction: {0}")]
    InternalContradiction(String),

    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
