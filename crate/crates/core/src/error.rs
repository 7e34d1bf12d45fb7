use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("design matrix would hold {requested} elements, budget is {budget}")]
    BudgetExceeded { requested: usize, budget: usize },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("design matrix is rank deficient: rank {rank} < {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("singular value decomposition did not converge")]
    SvdNonConvergence,

    #[error("duplicate Vandermonde generators at rows {0} and {1}")]
    DuplicateGenerators(usize, usize),

    #[error("outside the valid domain: {0}")]
    Domain(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
