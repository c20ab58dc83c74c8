//! Inference of visibly pushdown grammars from a membership oracle and seed strings.
//!
//! The pipeline discovers call/return structure in an unknown language by
//! pumping experiments on seed strings, infers either a character tagging or a
//! partial tokenizer for multi-character brackets, and then learns a
//! single-entry visibly pushdown automaton with a table-based active-learning
//! loop whose equivalence queries are simulated by conformance testing over
//! seed-derived test strings. The learned automaton exports to a well-matched
//! visibly pushdown grammar.

pub mod alphabet;
pub mod conformance;
pub mod dfa;
pub mod error;
pub mod grammar;
pub mod learner;
pub mod lstar;
pub mod machine;
pub mod metrics;
pub mod nesting;
pub mod oracle;
pub mod pipeline;
pub mod seeds;
pub mod tag_infer;
pub mod tokens;

pub use alphabet::{Alphabet, SymbolKind, TaggedAlphabet, TaggedString, Tagging, UnmatchedProfile};
pub use error::{Error, OracleError, Result};
pub use grammar::Vpg;
pub use machine::{RunOutcome, Sevpa};
pub use oracle::{CachedOracle, QueryPhase, QueryStats};
