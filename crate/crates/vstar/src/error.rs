use thiserror::Error;

/// Failure of a membership oracle backend. These are surfaced to the caller
/// instead of being mapped to a rejection, since a silently dropped query
/// would corrupt learning.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle timed out after {timeout_ms} ms on query of {len} bytes")]
    Timeout { timeout_ms: u64, len: usize },
    #[error("failed to spawn oracle process `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("i/o error while talking to oracle process: {0}")]
    Io(#[from] std::io::Error),
    #[error("oracle process terminated by signal on query of {len} bytes")]
    Killed { len: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("character {0:?} is not in the alphabet")]
    CharOutsideAlphabet(char),
    #[error("invalid tagging: {0}")]
    InvalidTagging(String),
    #[error("malformed grammar: {0}")]
    MalformedGrammar(String),
    #[error("grammar has no terminating derivation from the start nonterminal")]
    UnproductiveGrammar,
    #[error("symbol {0:?} is outside the machine alphabet")]
    SymbolOutsideMachine(char),
    #[error("malformed machine: {0}")]
    MalformedMachine(String),
    #[error("oracle failure: {0}")]
    Oracle(#[from] OracleError),
    #[error("seed string rejected by the oracle: {0:?}")]
    SeedRejected(String),
    #[error("string is not a counterexample: hypothesis and oracle agree on {0:?}")]
    NotACounterexample(String),
    #[error("counterexample {0:?} is not well-matched under the current tagging; the inferred tagging is incompatible with the language")]
    IllFormedCounterexample(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
