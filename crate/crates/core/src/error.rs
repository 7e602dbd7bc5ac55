use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state {state} out of range (automaton has {count} states)")]
    InvalidState { state: usize, count: usize },

    #[error("action {action} out of range (alphabet has {count} actions)")]
    InvalidAction { action: usize, count: usize },

    #[error("unknown action label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate action label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid action label `{0}`")]
    InvalidLabel(String),

    #[error("nondeterministic transition: ({state}, {action}) already has a successor")]
    Nondeterministic { state: usize, action: String },

    #[error("empty language: the initial state is not coreachable")]
    EmptyLanguage,

    #[error("language enumeration exceeded the cap of {0} strings")]
    OracleOverflow(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Include {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("automaton carries no product origin tags")]
    MissingOrigins,

    #[error("automaton cannot realize a supervisor: {0}")]
    NotRealizable(String),

    #[error("action `{action}` is not admissible at specification state {state}")]
    NotAdmissible { state: usize, action: String },

    #[error("alphabets differ: {0}")]
    AlphabetMismatch(String),

    #[error("value iteration did not converge within {0} sweeps")]
    NonConvergence(usize),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
