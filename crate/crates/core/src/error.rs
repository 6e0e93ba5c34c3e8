use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("duplicate label {0:?} in alphabet")]
    DuplicateLabel(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    /// The mapping puts positive mass on a pair the distortion matrix forbids.
    #[error("mapping puts mass {mass:e} on forbidden pair ({input}, {output})")]
    InfeasibleMapping { input: String, output: String, mass: f64 },

    /// No mapping can meet the distortion budget.
    #[error("distortion budget {delta} is below the minimum achievable distortion {min_distortion}")]
    InfeasibleDelta { delta: f64, min_distortion: f64 },

    #[error("l1 distance {l1} exceeds 1/2")]
    L1Precondition { l1: f64 },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("{variables} optimization variables exceed the cap of {cap}; quantize the alphabet first")]
    VariableCap { variables: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fold {fold} has a single class in its training split; use more data or stratify")]
    SingleClassFold { fold: usize },
}
