use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("gram block on subset {subset:?} is rank deficient (min eigenvalue {min_eigenvalue:e})")]
    RankDeficient { subset: Vec<usize>, min_eigenvalue: f64 },

    #[error("coordinate descent did not converge: max KKT violation {max_violation:e} after {iterations} cycles")]
    NotConverged { max_violation: f64, iterations: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{count} subsets exceed the enumeration budget of {budget}")]
    CombinatorialBudgetExceeded { count: f64, budget: f64 },

    #[error("eigen report lacks {0}")]
    MissingEigenValue(String),

    #[error("true support has {0} elements, above the oracle enumeration budget")]
    OracleBudgetExceeded(usize),

    #[error("coefficient {0} of the reference vector is zero")]
    ZeroCoefficient(usize),

    #[error("covariance block is singular")]
    SingularBlock,

    #[error("invalid unit vector: {0}")]
    InvalidUnitVector(String),

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 for bad input or configuration, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficient { .. }
            | Error::NotConverged { .. }
            | Error::CombinatorialBudgetExceeded { .. }
            | Error::SingularBlock
            | Error::ZeroCoefficient(_)
            | Error::MissingEigenValue(_) => 3,
            _ => 2,
        }
    }
}
