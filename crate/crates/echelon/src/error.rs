use crate::model::{Coalition, Partition};

/// Errors surfaced by the model types and solvers.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("price must be finite and nonnegative, got {0}")]
    InvalidPrice(f64),

    #[error("price sensitivity must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("invalid market parameters: {0}")]
    InvalidParams(String),

    #[error("action profile does not match partition {partition}: {reason}")]
    ProfileMismatch { partition: Partition, reason: String },

    #[error("no worth entry for coalition {coalition} under partition {partition}")]
    MissingWorth {
        partition: Partition,
        coalition: Coalition,
    },

    #[error("coalition {0} is a member of the partition and cannot block it")]
    BlockerInPartition(Coalition),

    #[error("eps = 1 is singular for the closed-form vertical-cooperation solver")]
    EpsSingular,

    #[error("no closed form for {0}; use the numerical estimate")]
    NoClosedForm(String),

    #[error("grid best-response iteration did not converge within {0} rounds")]
    OracleNonConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
