use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{location}: {message}")]
    Schema { location: String, message: String },

    #[error("{location}: kernel normalization failed at node {node}: {reason}")]
    Kernel {
        location: String,
        node: String,
        reason: String,
    },

    #[error("{location}: undefined {kind} {name:?}")]
    Unresolved {
        location: String,
        kind: &'static str,
        name: String,
    },

    #[error("{location}: {kind} {name:?} refers to itself")]
    Cycle {
        location: String,
        kind: &'static str,
        name: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: sublex::Error,
    },

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn engine(context: impl Into<String>, source: sublex::Error) -> Self {
        CliError::Engine {
            context: context.into(),
            source,
        }
    }

    /// 2 for failed theorem hypotheses, 3 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine { source, .. } if source.is_precondition() => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
