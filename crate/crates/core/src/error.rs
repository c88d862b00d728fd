use crate::space::Mode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("index {index} is outside the {mode} index set")]
    IndexOutOfMode { index: i64, mode: Mode },

    #[error("mode mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: Mode, found: Mode },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight at index {index} is not a positive finite double ({value})")]
    WeightOutOfRange { index: i64, value: f64 },

    #[error("operation requires p > 1 (got p = {p})")]
    UnsupportedExponent { p: f64 },

    #[error("gamma set is empty")]
    EmptyGamma,

    #[error("no witness met the first schedule level {delta0} within horizon {horizon}")]
    NoWitnessFound { delta0: f64, horizon: u64 },

    #[error("witness schedule exhausted while selecting target {target}")]
    WitnessExhausted { target: usize },

    #[error("invalid targets: {0}")]
    InvalidTargets(String),

    #[error("invalid witness schedule: {0}")]
    InvalidSchedule(String),

    #[error("stage {stage} has a numerically zero design matrix")]
    DegenerateStage { stage: u64 },

    #[error("search budget exhausted while certifying e_{basis} to {target:e}")]
    BudgetExhausted { basis: usize, target: f64 },

    #[error("weight ratio is unbounded over horizon {horizon}")]
    UnboundedRatio { horizon: u64 },

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error envelope.
    pub fn code(&self) -> &'static str {
        match self {
            Error::IndexOutOfMode { .. } => "IndexOutOfMode",
            Error::ModeMismatch { .. } => "ModeMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::WeightOutOfRange { .. } => "WeightOutOfRange",
            Error::UnsupportedExponent { .. } => "UnsupportedExponent",
            Error::EmptyGamma => "EmptyGamma",
            Error::NoWitnessFound { .. } => "NoWitnessFound",
            Error::WitnessExhausted { .. } => "WitnessExhausted",
            Error::InvalidTargets(_) => "InvalidTargets",
            Error::InvalidSchedule(_) => "InvalidSchedule",
            Error::DegenerateStage { .. } => "DegenerateStage",
            Error::BudgetExhausted { .. } => "BudgetExhausted",
            Error::UnboundedRatio { .. } => "UnboundedRatio",
            Error::HypothesisUnmet(_) => "HypothesisUnmet",
        }
    }
}
