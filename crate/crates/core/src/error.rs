use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model at node `{node}`: {reason}")]
    InvalidSpec { node: String, reason: String },

    #[error("nonlinear path through node `{node}`; use Monte Carlo instead")]
    NonlinearPath { node: String },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("no ground-truth contract for LATE under exclusion violation (via `{via}`)")]
    LateExclusionViolated { via: String },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{column}` is not binary 0/1")]
    NotBinary { column: String },

    #[error("degenerate arm: column `{column}` has no units at level {level}")]
    DegenerateArm { column: String, level: u8 },

    #[error("degenerate outcome: {0}")]
    DegenerateOutcome(String),

    #[error("design matrix is rank deficient: column `{column}` is linearly dependent")]
    RankDeficient { column: String },

    #[error("weak/zero first stage: instrument contrast in treatment is {0:e}")]
    WeakFirstStage(f64),

    #[error("positivity violated in stratum {stratum}")]
    Positivity { stratum: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed workflow answers: {}", .0.join("; "))]
    InvalidAnswers(Vec<String>),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad inputs).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonlinearPath { .. }
                | Error::RankDeficient { .. }
                | Error::WeakFirstStage(_)
                | Error::Positivity { .. }
                | Error::LateExclusionViolated { .. }
        )
    }
}
