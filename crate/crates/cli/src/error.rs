use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error(transparent)]
    Core(#[from] privf_core::Error),

    /// A computation produced a non-finite or inconsistent value.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Data { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    pub fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Self {
        let path = path.into();
        move |source| Self::Csv { path, source }
    }

    /// 2 for bad input, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numeric(_) => 3,
            Self::Core(privf_core::Error::InfeasibleMapping { .. }) => 3,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::data("f.csv", "bad").exit_code(), 2);
        assert_eq!(CliError::Numeric("nan".into()).exit_code(), 3);
        let forbidden = privf_core::Error::InfeasibleMapping { input: "b".into(), output: "c".into(), mass: 0.5 };
        assert_eq!(CliError::Core(forbidden).exit_code(), 3);
        let cap = privf_core::Error::VariableCap { variables: 10, cap: 1 };
        assert_eq!(CliError::Core(cap).exit_code(), 2);
    }
}
