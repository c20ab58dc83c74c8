//! End-to-end inference pipelines: structure inference (tagging or
//! tokenizer), automaton learning with simulated equivalence, and grammar
//! export, shared by the command-line front end and the test suites.

use serde::Serialize;

use crate::alphabet::{Alphabet, TaggedAlphabet, Tagging};
use crate::conformance::{CharImager, ConvImager, CorpusLimits, EquivalenceStrategy, Imager};
use crate::error::{Error, Result};
use crate::grammar::Vpg;
use crate::learner::{learn, LearnOutcome, LearnerConfig, RoundRecord};
use crate::machine::Sevpa;
use crate::oracle::{CachedOracle, CharTaggedOracle, ConvTaggedOracle, QueryPhase, TaggedOracle};
use crate::tag_infer::{tag_infer, TagInferConfig, TagInference};
use crate::tokens::{token_infer, PartialTokenizer, TokenInferConfig, TokenInference};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Char,
    Token,
}

#[derive(Debug, Clone)]
pub enum EquivalenceConfig {
    /// Reference-grammar teacher, exhaustive up to the length bound.
    Perfect { reference: Vpg, max_len: usize },
    /// Seed-fragment conformance corpus.
    Seeds { limits: CorpusLimits },
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub tag: TagInferConfig,
    pub token: TokenInferConfig,
    pub equivalence: EquivalenceConfig,
    pub learner: LearnerConfig,
}

impl PipelineConfig {
    pub fn new(mode: Mode) -> Self {
        PipelineConfig {
            mode,
            tag: TagInferConfig::default(),
            token: TokenInferConfig::default(),
            equivalence: EquivalenceConfig::Seeds {
                limits: CorpusLimits::default(),
            },
            learner: LearnerConfig::default(),
        }
    }
}

/// Everything a learning run produces.
pub struct LearnArtifacts {
    pub mode: Mode,
    pub tagging: Option<TagInference>,
    pub tokenizer: Option<TokenInference>,
    pub machine: Sevpa,
    pub grammar: Vpg,
    pub converged: bool,
    pub rounds: usize,
    pub trace: Vec<RoundRecord>,
    pub corpus_size: usize,
}

impl LearnArtifacts {
    /// The imager for this run's machine: tagging in char mode, bracket
    /// conversion in token mode.
    pub fn imager<'a>(&'a self, oracle: &'a CachedOracle) -> Box<dyn Imager + 'a> {
        match self.mode {
            Mode::Char => Box::new(CharImager {
                alphabet: self.machine.alphabet(),
            }),
            Mode::Token => Box::new(ConvImager {
                tokenizer: &self
                    .tokenizer
                    .as_ref()
                    .expect("token-mode artifacts carry a tokenizer")
                    .tokenizer,
                oracle,
            }),
        }
    }
}

fn run_learn_loop(
    oracle_view: &dyn TaggedOracle,
    alphabet: TaggedAlphabet,
    strategy: &EquivalenceStrategy,
    imager: &dyn Imager,
    cfg: &LearnerConfig,
) -> Result<LearnOutcome> {
    let mut find = |hyp: &crate::learner::Hypothesis| {
        strategy.find_counterexample(hyp, imager, oracle_view)
    };
    learn(oracle_view, alphabet, &mut find, *cfg)
}

/// Character-mode pipeline: infer a tagging, learn the machine, export.
pub fn learn_char_mode(
    oracle: &CachedOracle,
    seeds: &[String],
    cfg: &PipelineConfig,
) -> Result<LearnArtifacts> {
    oracle.set_phase(QueryPhase::TokenInfer);
    let inference = tag_infer(oracle, seeds, &cfg.tag)?.ok_or_else(|| {
        Error::Config(format!(
            "no compatible tagging found within pumping bound cap {}",
            cfg.tag.k_cap
        ))
    })?;
    let alphabet = Alphabet::from_strings(seeds)?;
    let tagged_alphabet = TaggedAlphabet::from_tagging(&alphabet, &inference.tagging);
    let view = CharTaggedOracle { oracle };
    let imager = CharImager {
        alphabet: &tagged_alphabet,
    };
    oracle.set_phase(QueryPhase::EquivSim);
    let strategy = match &cfg.equivalence {
        EquivalenceConfig::Perfect { reference, max_len } => EquivalenceStrategy::PerfectTeacher {
            reference: reference.clone(),
            max_len: *max_len,
        },
        EquivalenceConfig::Seeds { limits } => {
            EquivalenceStrategy::seed_combination(seeds, &imager, limits)?
        }
    };
    let outcome = run_learn_loop(&view, tagged_alphabet.clone(), &strategy, &imager, &cfg.learner)?;
    let grammar = outcome.machine.to_vpg()?;
    Ok(LearnArtifacts {
        mode: Mode::Char,
        tagging: Some(inference),
        tokenizer: None,
        machine: outcome.machine,
        grammar,
        converged: outcome.converged,
        rounds: outcome.rounds,
        trace: outcome.trace,
        corpus_size: strategy.corpus_size(),
    })
}

/// Token-mode pipeline: infer a partial tokenizer, learn the machine over
/// bracket-converted strings, export.
pub fn learn_token_mode(
    oracle: &CachedOracle,
    seeds: &[String],
    cfg: &PipelineConfig,
) -> Result<LearnArtifacts> {
    oracle.set_phase(QueryPhase::TokenInfer);
    let inference = token_infer(oracle, seeds, &cfg.token)?.ok_or_else(|| {
        Error::Config(format!(
            "no compatible tokenizer found within pumping bound cap {}",
            cfg.token.k_cap
        ))
    })?;
    let base = Alphabet::from_strings(seeds)?;
    let conv_alphabet = inference.tokenizer.conv_alphabet(&base);
    let view = ConvTaggedOracle {
        oracle,
        tokenizer: &inference.tokenizer,
    };
    let imager = ConvImager {
        tokenizer: &inference.tokenizer,
        oracle,
    };
    oracle.set_phase(QueryPhase::EquivSim);
    let strategy = match &cfg.equivalence {
        EquivalenceConfig::Perfect { reference, max_len } => EquivalenceStrategy::PerfectTeacher {
            reference: reference.clone(),
            max_len: *max_len,
        },
        EquivalenceConfig::Seeds { limits } => {
            EquivalenceStrategy::seed_combination(seeds, &imager, limits)?
        }
    };
    let outcome = run_learn_loop(&view, conv_alphabet, &strategy, &imager, &cfg.learner)?;
    let grammar = outcome.machine.to_vpg()?;
    Ok(LearnArtifacts {
        mode: Mode::Token,
        tagging: None,
        tokenizer: Some(inference),
        machine: outcome.machine,
        grammar,
        converged: outcome.converged,
        rounds: outcome.rounds,
        trace: outcome.trace,
        corpus_size: strategy.corpus_size(),
    })
}

pub fn run_learn(
    oracle: &CachedOracle,
    seeds: &[String],
    cfg: &PipelineConfig,
) -> Result<LearnArtifacts> {
    if seeds.is_empty() {
        return Err(Error::Config("seed set is empty".into()));
    }
    match cfg.mode {
        Mode::Char => learn_char_mode(oracle, seeds, cfg),
        Mode::Token => learn_token_mode(oracle, seeds, cfg),
    }
}

/// Serialized tokenizer plus tagging forms for artifact files.
#[derive(Serialize)]
pub struct StructureFile<'a> {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tagging: Option<&'a Tagging>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<&'a PartialTokenizer>,
}
