use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be positive, got {value}")]
    Domain { name: &'static str, value: f64 },

    #[error("unknown scenario `{0}` (expected one of setup1, setup2, setup3, industrial_combined, office_38901)")]
    UnknownScenario(String),

    #[error("scenario `{name}` has no {condition} table")]
    MissingCondition { name: String, condition: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e}); repair it with nearest_correlation first")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("design matrix is rank deficient: `{covariate}` is not identifiable from the records")]
    RankDeficient { covariate: &'static str },

    #[error("not enough data: need at least {needed} {what}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("CIR window of {n_taps} taps is too short: the longest path needs {required} taps")]
    CirTooShort { n_taps: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
