//! Membership-query abstraction: caching, query accounting, reference
//! oracles backed by a grammar, and an external-process oracle.

use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};
use std::sync::RwLock;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::alphabet::TaggedString;
use crate::error::{Error, OracleError, Result};
use crate::grammar::Vpg;
use crate::tokens::PartialTokenizer;

/// Which stage of the pipeline issued a query; used for the query-count
/// breakdown in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum QueryPhase {
    /// Tag or token inference, including nesting-pattern pumping and
    /// lexical-rule learning.
    TokenInfer = 0,
    /// Observation-table maintenance and counterexample processing.
    VpaLearn = 1,
    /// Equivalence simulation: scanning the conformance corpus.
    EquivSim = 2,
    /// Everything else (evaluation, ad hoc).
    Other = 3,
}

const PHASES: usize = 4;

/// Query counters. `total_raw` counts every call, `unique` the distinct
/// strings that reached the backend, `cache_hits` the rest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub total_raw: u64,
    pub unique: u64,
    pub cache_hits: u64,
    pub unique_token_infer: u64,
    pub unique_vpa_learn: u64,
    pub unique_equiv_sim: u64,
    pub unique_other: u64,
}

/// A deterministic membership function for raw strings.
pub trait MembershipBackend: Send + Sync {
    fn check(&self, s: &str) -> std::result::Result<bool, OracleError>;
}

impl<F> MembershipBackend for F
where
    F: Fn(&str) -> bool + Send + Sync,
{
    fn check(&self, s: &str) -> std::result::Result<bool, OracleError> {
        Ok(self(s))
    }
}

/// Membership oracle with a cache keyed by the exact byte string. Each
/// distinct string hits the backend at most once; answers are therefore
/// identical to those of the uncached backend.
pub struct CachedOracle {
    backend: Box<dyn MembershipBackend>,
    cache: RwLock<HashMap<String, bool>>,
    total_raw: AtomicU64,
    unique: AtomicU64,
    cache_hits: AtomicU64,
    unique_by_phase: [AtomicU64; PHASES],
    phase: AtomicU8,
}

impl CachedOracle {
    pub fn new(backend: Box<dyn MembershipBackend>) -> Self {
        CachedOracle {
            backend,
            cache: RwLock::new(HashMap::new()),
            total_raw: AtomicU64::new(0),
            unique: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
            unique_by_phase: Default::default(),
            phase: AtomicU8::new(QueryPhase::Other as u8),
        }
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&str) -> bool + Send + Sync + 'static,
    {
        CachedOracle::new(Box::new(f))
    }

    /// Reference oracle: membership of the raw string in the grammar's
    /// untagged language. Characters outside the grammar alphabet reject.
    pub fn from_vpg(grammar: Vpg) -> Self {
        CachedOracle::new(Box::new(move |s: &str| match grammar.alphabet().tag(s) {
            Ok(tagged) => grammar.recognizes(&tagged),
            Err(_) => false,
        }))
    }

    pub fn set_phase(&self, phase: QueryPhase) {
        self.phase.store(phase as u8, Ordering::Relaxed);
    }

    pub fn query(&self, s: &str) -> Result<bool> {
        self.total_raw.fetch_add(1, Ordering::Relaxed);
        if let Some(&answer) = self.cache.read().unwrap().get(s) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(answer);
        }
        let answer = self.backend.check(s).map_err(Error::Oracle)?;
        let mut cache = self.cache.write().unwrap();
        if cache.insert(s.to_string(), answer).is_none() {
            self.unique.fetch_add(1, Ordering::Relaxed);
            let phase = self.phase.load(Ordering::Relaxed) as usize;
            self.unique_by_phase[phase].fetch_add(1, Ordering::Relaxed);
        } else {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
        }
        Ok(answer)
    }

    pub fn stats(&self) -> QueryStats {
        QueryStats {
            total_raw: self.total_raw.load(Ordering::Relaxed),
            unique: self.unique.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
            unique_token_infer: self.unique_by_phase[QueryPhase::TokenInfer as usize]
                .load(Ordering::Relaxed),
            unique_vpa_learn: self.unique_by_phase[QueryPhase::VpaLearn as usize]
                .load(Ordering::Relaxed),
            unique_equiv_sim: self.unique_by_phase[QueryPhase::EquivSim as usize]
                .load(Ordering::Relaxed),
            unique_other: self.unique_by_phase[QueryPhase::Other as usize].load(Ordering::Relaxed),
        }
    }
}

/// How a candidate string is delivered to an external oracle process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Bytes written to the child's stdin, which is then closed.
    Stdin,
    /// Bytes written to a temp file whose path replaces `{}` in the args.
    FileSubstitution,
}

/// Invocation recipe for a black-box program used as a membership oracle.
/// Acceptance is decided by comparing the exit code with `accept_on`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalProcessSpec {
    pub command: String,
    pub args: Vec<String>,
    pub input_mode: InputMode,
    pub accept_on: i32,
    pub timeout_ms: u64,
}

impl ExternalProcessSpec {
    pub fn new(command: String, args: Vec<String>) -> Self {
        ExternalProcessSpec {
            command,
            args,
            input_mode: InputMode::Stdin,
            accept_on: 0,
            timeout_ms: default_timeout_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout_ms == 0 {
            return Err(Error::Config("oracle timeout must be positive".into()));
        }
        Ok(())
    }
}

/// Default process timeout; `VSTAR_ORACLE_TIMEOUT_MS` overrides it.
pub fn default_timeout_ms() -> u64 {
    std::env::var("VSTAR_ORACLE_TIMEOUT_MS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(10_000)
}

/// Backend that runs one process per query. A crash or timeout is an error,
/// never a rejection.
pub struct ExternalProcessOracle {
    spec: ExternalProcessSpec,
}

impl ExternalProcessOracle {
    pub fn new(spec: ExternalProcessSpec) -> Result<Self> {
        spec.validate()?;
        Ok(ExternalProcessOracle { spec })
    }
}

impl MembershipBackend for ExternalProcessOracle {
    fn check(&self, s: &str) -> std::result::Result<bool, OracleError> {
        let mut temp = None;
        let mut cmd = Command::new(&self.spec.command);
        match self.spec.input_mode {
            InputMode::Stdin => {
                cmd.args(&self.spec.args).stdin(Stdio::piped());
            }
            InputMode::FileSubstitution => {
                let file = std::env::temp_dir().join(format!(
                    "vstar-query-{}-{:x}",
                    std::process::id(),
                    std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .unwrap()
                        .as_nanos()
                ));
                std::fs::write(&file, s.as_bytes())?;
                let path = file.display().to_string();
                cmd.args(
                    self.spec
                        .args
                        .iter()
                        .map(|a| if a == "{}" { path.clone() } else { a.clone() }),
                )
                .stdin(Stdio::null());
                temp = Some(file);
            }
        }
        cmd.stdout(Stdio::null()).stderr(Stdio::null());
        let mut child = cmd.spawn().map_err(|e| OracleError::Spawn {
            command: self.spec.command.clone(),
            source: e,
        })?;
        if self.spec.input_mode == InputMode::Stdin {
            // stdin handle drops at the end of this block, closing the pipe
            let mut stdin = child.stdin.take().expect("piped stdin");
            // a child that exits without reading produces EPIPE; treat as done
            let _ = stdin.write_all(s.as_bytes());
        }
        let deadline = Instant::now() + Duration::from_millis(self.spec.timeout_ms);
        let status = loop {
            match child.try_wait()? {
                Some(status) => break status,
                None => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        if let Some(f) = temp {
                            let _ = std::fs::remove_file(f);
                        }
                        return Err(OracleError::Timeout {
                            timeout_ms: self.spec.timeout_ms,
                            len: s.len(),
                        });
                    }
                    std::thread::sleep(Duration::from_micros(300));
                }
            }
        };
        if let Some(f) = temp {
            let _ = std::fs::remove_file(f);
        }
        match status.code() {
            Some(code) => Ok(code == self.spec.accept_on),
            None => Err(OracleError::Killed { len: s.len() }),
        }
    }
}

/// Membership over tagged strings, as seen by the automaton learner. The
/// character-level view strips tags; the token-level view additionally
/// requires the string to be a faithful bracket-insertion image.
pub trait TaggedOracle {
    fn member(&self, s: &TaggedString) -> Result<bool>;
    fn raw_member(&self, s: &str) -> Result<bool>;
    fn set_phase(&self, phase: QueryPhase);
    fn unique_queries(&self) -> u64;
}

/// Character-mode view: membership of the untagged string.
pub struct CharTaggedOracle<'a> {
    pub oracle: &'a CachedOracle,
}

impl TaggedOracle for CharTaggedOracle<'_> {
    fn member(&self, s: &TaggedString) -> Result<bool> {
        self.oracle.query(&s.untag())
    }

    fn raw_member(&self, s: &str) -> Result<bool> {
        self.oracle.query(s)
    }

    fn set_phase(&self, phase: QueryPhase) {
        self.oracle.set_phase(phase);
    }

    fn unique_queries(&self) -> u64 {
        self.oracle.stats().unique
    }
}

/// Token-mode view: a tagged string over base characters plus artificial
/// brackets is a member iff the underlying raw string is valid and the
/// tokenizer's bracket insertion reproduces the tagged string exactly.
pub struct ConvTaggedOracle<'a> {
    pub oracle: &'a CachedOracle,
    pub tokenizer: &'a PartialTokenizer,
}

impl TaggedOracle for ConvTaggedOracle<'_> {
    fn member(&self, s: &TaggedString) -> Result<bool> {
        let raw = self.tokenizer.erase(s);
        if !self.oracle.query(&raw)? {
            return Ok(false);
        }
        let image = self.tokenizer.conv(&raw, self.oracle)?;
        Ok(image == *s)
    }

    fn raw_member(&self, s: &str) -> Result<bool> {
        self.oracle.query(s)
    }

    fn set_phase(&self, phase: QueryPhase) {
        self.oracle.set_phase(phase);
    }

    fn unique_queries(&self) -> u64 {
        self.oracle.stats().unique
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_oracle_has_zero_stats() {
        let oracle = CachedOracle::from_fn(|_| true);
        assert_eq!(oracle.stats(), QueryStats::default());
    }

    #[test]
    fn repeated_query_hits_cache() {
        let oracle = CachedOracle::from_fn(|s: &str| s.len() % 2 == 0);
        oracle.query("ab").unwrap();
        oracle.query("ab").unwrap();
        let stats = oracle.stats();
        assert_eq!(stats.total_raw, 2);
        assert_eq!(stats.unique, 1);
        assert_eq!(stats.cache_hits, 1);
    }

    #[test]
    fn distinct_queries_count_unique() {
        let oracle = CachedOracle::from_fn(|_| false);
        oracle.query("x").unwrap();
        oracle.query("y").unwrap();
        let stats = oracle.stats();
        assert_eq!(stats.unique, 2);
        assert_eq!(stats.total_raw, stats.unique + stats.cache_hits);
    }

    #[test]
    fn phase_attribution_splits_unique_counts() {
        let oracle = CachedOracle::from_fn(|_| true);
        oracle.set_phase(QueryPhase::TokenInfer);
        oracle.query("a").unwrap();
        oracle.set_phase(QueryPhase::VpaLearn);
        oracle.query("b").unwrap();
        oracle.query("a").unwrap(); // cached, not attributed anywhere
        let stats = oracle.stats();
        assert_eq!(stats.unique_token_infer, 1);
        assert_eq!(stats.unique_vpa_learn, 1);
        assert_eq!(stats.unique, 2);
    }

    #[test]
    fn external_oracle_checks_exit_code() {
        let spec = ExternalProcessSpec {
            command: "sh".into(),
            args: vec!["-c".into(), "grep -q ok".into()],
            input_mode: InputMode::Stdin,
            accept_on: 0,
            timeout_ms: 5_000,
        };
        let oracle = CachedOracle::new(Box::new(ExternalProcessOracle::new(spec).unwrap()));
        assert!(oracle.query("this is ok").unwrap());
        assert!(!oracle.query("this is not").unwrap());
    }

    #[test]
    fn external_oracle_file_substitution() {
        let spec = ExternalProcessSpec {
            command: "sh".into(),
            args: vec!["-c".into(), r#"grep -q ok "$0""#.into(), "{}".into()],
            input_mode: InputMode::FileSubstitution,
            accept_on: 0,
            timeout_ms: 5_000,
        };
        let oracle = CachedOracle::new(Box::new(ExternalProcessOracle::new(spec).unwrap()));
        assert!(oracle.query("ok here").unwrap());
        assert!(!oracle.query("nothing").unwrap());
    }

    #[test]
    fn external_oracle_timeout_is_an_error() {
        let spec = ExternalProcessSpec {
            command: "sh".into(),
            args: vec!["-c".into(), "sleep 5".into()],
            input_mode: InputMode::Stdin,
            accept_on: 0,
            timeout_ms: 50,
        };
        let oracle = CachedOracle::new(Box::new(ExternalProcessOracle::new(spec).unwrap()));
        match oracle.query("x") {
            Err(Error::Oracle(OracleError::Timeout { .. })) => {}
            other => panic!("expected timeout error, got {other:?}"),
        }
    }

    #[test]
    fn zero_timeout_rejected() {
        let mut spec = ExternalProcessSpec::new("true".into(), vec![]);
        spec.timeout_ms = 0;
        assert!(ExternalProcessOracle::new(spec).is_err());
    }
}
