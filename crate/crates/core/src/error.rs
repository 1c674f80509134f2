use thiserror::Error;

#[derive(Debug, Error)]
pub enum CilsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// `G` does not have full column rank, so the triangular factor has a zero pivot.
    #[error("matrix is rank deficient (|r[{index}][{index}]| = {value:e})")]
    RankDeficient { index: usize, value: f64 },

    /// The feasible row set cannot span the requested rank.
    #[error("infeasible: feasible rows span rank {achievable}, rank {required} requested")]
    Infeasible { achievable: usize, required: usize },

    /// A row-candidate tree became empty during the search.
    #[error("infeasible search state: candidate tree for row {row} is empty")]
    EmptyTree { row: usize },

    #[error("enumeration budget exceeded: {needed} points needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("invalid instance file: {0}")]
    InstanceFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CilsError>;
