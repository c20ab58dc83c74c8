//! Command-line front end: learn a grammar from seeds and an oracle,
//! evaluate a learned machine, tokenize inputs, and export grammars.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vstar::conformance::CorpusLimits;
use vstar::error::{Error, Result};
use vstar::grammar::Vpg;
use vstar::machine::{Sevpa, SevpaFile};
use vstar::metrics::{self, EvalReport};
use vstar::nesting::NestingLimits;
use vstar::oracle::{
    default_timeout_ms, CachedOracle, ExternalProcessOracle, ExternalProcessSpec, InputMode,
};
use vstar::pipeline::{
    run_learn, EquivalenceConfig, LearnArtifacts, Mode, PipelineConfig, StructureFile,
};
use vstar::seeds::read_seed_file;
use vstar::tag_infer::{tag_infer, TagInferConfig};
use vstar::tokens::PartialTokenizer;

#[derive(Parser)]
#[command(name = "vstar", version, about = "Grammar inference for visibly pushdown languages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer structure from seeds and learn an automaton plus grammar.
    Learn(LearnArgs),
    /// Compute recall/precision/F1 of learned artifacts against a dataset.
    Eval(EvalArgs),
    /// Tokenize an input with a learned tokenizer and print the conversion.
    Tokenize(TokenizeArgs),
    /// Re-export the grammar of a machine file.
    Export(ExportArgs),
    /// Infer only the call/return tagging of the seeds.
    InferTags(InferTagsArgs),
}

#[derive(Args)]
struct OracleArg {
    /// Oracle spec: `vpg:<grammar.json>` or `cmd:<shell words>`; a `{}`
    /// argument switches the process oracle to file substitution.
    #[arg(long)]
    oracle: String,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    oracle: OracleArg,
    /// Seed file, one escaped seed per line.
    #[arg(long)]
    seeds: PathBuf,
    /// Structure inference mode.
    #[arg(long, value_parser = ["char", "token"], default_value = "char")]
    mode: String,
    /// Output directory for all artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Equivalence simulation: seed-fragment corpus or perfect teacher.
    #[arg(long = "eq-mode", value_parser = ["seeds", "perfect"], default_value = "seeds")]
    eq_mode: String,
    /// Length bound of the perfect teacher.
    #[arg(long = "eq-maxlen", default_value_t = 8)]
    eq_maxlen: usize,
    /// Reference grammar for the perfect teacher; defaults to the oracle's
    /// grammar when the oracle is `vpg:`.
    #[arg(long = "eq-grammar")]
    eq_grammar: Option<PathBuf>,
    /// Maximum corpus fragment length.
    #[arg(long = "max-fragment", default_value_t = 20)]
    max_fragment: usize,
    /// Maximum corpus size.
    #[arg(long = "max-corpus", default_value_t = 100_000)]
    max_corpus: usize,
    /// Infix fragments per test string (0-2).
    #[arg(long, default_value_t = 1)]
    infixes: usize,
    /// Cap on the escalating pumping bound.
    #[arg(long = "k-cap", default_value_t = 6)]
    k_cap: usize,
    /// Maximum |x| and |y| when enumerating nesting patterns.
    #[arg(long = "max-frag", default_value_t = 8)]
    max_frag: usize,
    /// Cap on equivalence rounds.
    #[arg(long = "max-rounds", default_value_t = 256)]
    max_rounds: usize,
    /// Seed for samplers (reserved for future stochastic corpus modes).
    #[arg(long = "rng-seed", default_value_t = 0)]
    rng_seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    oracle: OracleArg,
    /// Directory holding machine.json, structure.json and report.json from
    /// a learn run.
    #[arg(long)]
    artifacts: PathBuf,
    /// File of positive examples, one escaped string per line.
    #[arg(long)]
    dataset: PathBuf,
    /// Strings sampled from the learned grammar for precision.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Depth bound for grammar sampling.
    #[arg(long = "sample-depth", default_value_t = 24)]
    sample_depth: usize,
    #[arg(long = "rng-seed", default_value_t = 0)]
    rng_seed: u64,
    /// Output directory; defaults to the artifacts directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TokenizeArgs {
    #[command(flatten)]
    oracle: OracleArg,
    /// Tokenizer JSON (a structure.json or bare tokenizer file).
    #[arg(long)]
    tokenizer: PathBuf,
    /// Input file; mutually exclusive with --text.
    #[arg(long, conflicts_with = "text")]
    input: Option<PathBuf>,
    /// Input given inline.
    #[arg(long)]
    text: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    /// Machine JSON file.
    #[arg(long)]
    machine: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InferTagsArgs {
    #[command(flatten)]
    oracle: OracleArg,
    #[arg(long)]
    seeds: PathBuf,
    #[arg(long = "k-cap", default_value_t = 6)]
    k_cap: usize,
    #[arg(long = "max-frag", default_value_t = 8)]
    max_frag: usize,
}

/// Splits a command line into words, honoring single/double quotes and
/// backslash escapes outside single quotes.
fn split_shell_words(s: &str) -> Result<Vec<String>> {
    let mut words = Vec::new();
    let mut cur = String::new();
    let mut in_word = false;
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ' ' | '\t' if in_word => {
                words.push(std::mem::take(&mut cur));
                in_word = false;
            }
            ' ' | '\t' => {}
            '\'' => {
                in_word = true;
                for q in chars.by_ref() {
                    if q == '\'' {
                        break;
                    }
                    cur.push(q);
                }
            }
            '"' => {
                in_word = true;
                while let Some(q) = chars.next() {
                    match q {
                        '"' => break,
                        '\\' => {
                            if let Some(e) = chars.next() {
                                cur.push(e);
                            }
                        }
                        q => cur.push(q),
                    }
                }
            }
            '\\' => {
                in_word = true;
                if let Some(e) = chars.next() {
                    cur.push(e);
                }
            }
            c => {
                in_word = true;
                cur.push(c);
            }
        }
    }
    if in_word {
        words.push(cur);
    }
    if words.is_empty() {
        return Err(Error::Config("empty oracle command".into()));
    }
    Ok(words)
}

fn build_oracle(spec: &str) -> Result<CachedOracle> {
    if let Some(path) = spec.strip_prefix("vpg:") {
        let grammar = Vpg::load(Path::new(path))?;
        Ok(CachedOracle::from_vpg(grammar))
    } else if let Some(cmdline) = spec.strip_prefix("cmd:") {
        let words = split_shell_words(cmdline)?;
        let input_mode = if words.iter().skip(1).any(|w| w == "{}") {
            InputMode::FileSubstitution
        } else {
            InputMode::Stdin
        };
        let spec = ExternalProcessSpec {
            command: words[0].clone(),
            args: words[1..].to_vec(),
            input_mode,
            accept_on: 0,
            timeout_ms: default_timeout_ms(),
        };
        Ok(CachedOracle::new(Box::new(ExternalProcessOracle::new(
            spec,
        )?)))
    } else {
        Err(Error::Config(format!(
            "oracle spec must start with `vpg:` or `cmd:`, got {spec:?}"
        )))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_learn(args: &LearnArgs) -> Result<bool> {
    let started = Instant::now();
    let oracle = build_oracle(&args.oracle.oracle)?;
    let seeds = read_seed_file(&args.seeds)?;
    let mode = if args.mode == "token" {
        Mode::Token
    } else {
        Mode::Char
    };
    let mut cfg = PipelineConfig::new(mode);
    cfg.tag = TagInferConfig {
        k_cap: args.k_cap,
        limits: NestingLimits {
            max_frag: args.max_frag,
        },
    };
    cfg.token.k_cap = args.k_cap;
    cfg.token.limits = NestingLimits {
        max_frag: args.max_frag,
    };
    cfg.learner.max_rounds = args.max_rounds;
    cfg.equivalence = match args.eq_mode.as_str() {
        "perfect" => {
            let path = match (&args.eq_grammar, args.oracle.oracle.strip_prefix("vpg:")) {
                (Some(p), _) => p.clone(),
                (None, Some(p)) => PathBuf::from(p),
                (None, None) => {
                    return Err(Error::Config(
                        "--eq-mode perfect needs --eq-grammar or a vpg: oracle".into(),
                    ))
                }
            };
            EquivalenceConfig::Perfect {
                reference: Vpg::load(&path)?,
                max_len: args.eq_maxlen,
            }
        }
        _ => EquivalenceConfig::Seeds {
            limits: CorpusLimits {
                max_fragment: args.max_fragment,
                max_corpus: args.max_corpus,
                infixes: args.infixes,
            },
        },
    };

    let artifacts = run_learn(&oracle, &seeds, &cfg)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(args.out.display().to_string(), e))?;
    write_artifacts(&args.out, &artifacts, &oracle)?;
    let elapsed = started.elapsed().as_secs_f64();
    let stats = oracle.stats();
    println!(
        "mode={} states={} rounds={} converged={} corpus={} unique_queries={} time={elapsed:.1}s",
        if artifacts.mode == Mode::Token { "token" } else { "char" },
        artifacts.machine.state_count(),
        artifacts.rounds,
        artifacts.converged,
        artifacts.corpus_size,
        stats.unique,
    );
    Ok(artifacts.converged)
}

fn write_artifacts(out: &Path, artifacts: &LearnArtifacts, oracle: &CachedOracle) -> Result<()> {
    write_json(&out.join("machine.json"), &artifacts.machine.to_json())?;
    write_json(&out.join("grammar.json"), &artifacts.grammar.to_json())?;
    write_text(&out.join("grammar.txt"), &artifacts.grammar.to_text())?;
    let structure = StructureFile {
        mode: artifacts.mode,
        tagging: artifacts.tagging.as_ref().map(|t| &t.tagging),
        tokenizer: artifacts.tokenizer.as_ref().map(|t| &t.tokenizer),
    };
    write_json(&out.join("structure.json"), &structure)?;
    let mut trace = String::new();
    for record in &artifacts.trace {
        trace.push_str(&serde_json::to_string(record)?);
        trace.push('\n');
    }
    write_text(&out.join("trace.jsonl"), &trace)?;
    let report = EvalReport {
        recall: 0.0,
        precision: 0.0,
        f1: 0.0,
        stats: oracle.stats(),
        corpus_size: artifacts.corpus_size,
        sample_size: 0,
        dataset_size: 0,
        elapsed_secs: None,
    };
    write_json(&out.join("report.json"), &report)?;
    write_text(&out.join("report.txt"), &report.to_table())?;
    if let Some(t) = &artifacts.tokenizer {
        if !t.warnings.is_empty() {
            let mut text = String::new();
            for w in &t.warnings {
                text.push_str(w);
                text.push('\n');
            }
            write_text(&out.join("warnings.txt"), &text)?;
        }
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct StructureIn {
    mode: String,
    // the char-mode tagging is implied by the machine's pair alphabet
    #[serde(default)]
    tokenizer: Option<PartialTokenizer>,
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let started = Instant::now();
    let oracle = build_oracle(&args.oracle.oracle)?;
    let machine_file: SevpaFile = read_json(&args.artifacts.join("machine.json"))?;
    let machine = Sevpa::from_json(&machine_file)?;
    let structure: StructureIn = read_json(&args.artifacts.join("structure.json"))?;
    let learn_report: Option<EvalReport> = read_json(&args.artifacts.join("report.json")).ok();
    let dataset = read_seed_file(&args.dataset)?;
    if dataset.is_empty() {
        return Err(Error::Config("dataset is empty, recall is undefined".into()));
    }

    let alphabet = machine.alphabet().clone();
    let imager: Box<dyn vstar::conformance::Imager> = match structure.mode.as_str() {
        "token" => {
            let tokenizer = structure
                .tokenizer
                .as_ref()
                .ok_or_else(|| Error::Config("token-mode structure without tokenizer".into()))?;
            Box::new(OwnedConvImager {
                tokenizer: tokenizer.clone(),
                oracle: &oracle,
            })
        }
        _ => Box::new(vstar::conformance::CharImager { alphabet: &alphabet }),
    };
    let recall = metrics::recall(&machine, imager.as_ref(), &dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.rng_seed);
    let precision = metrics::precision(
        &machine,
        imager.as_ref(),
        &oracle,
        args.samples,
        args.sample_depth,
        &mut rng,
    )?;
    let f1 = metrics::f1(recall, precision);
    let stats = match &learn_report {
        Some(r) => r.stats,
        None => oracle.stats(),
    };
    let report = EvalReport {
        recall,
        precision,
        f1,
        stats,
        corpus_size: learn_report.map(|r| r.corpus_size).unwrap_or(0),
        sample_size: args.samples,
        dataset_size: dataset.len(),
        elapsed_secs: Some(started.elapsed().as_secs_f64()),
    };
    let out = args.out.clone().unwrap_or_else(|| args.artifacts.clone());
    std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
    let mut file_report = report.clone();
    file_report.elapsed_secs = None;
    write_json(&out.join("report.json"), &file_report)?;
    write_text(&out.join("report.txt"), &file_report.to_table())?;
    print!("{}", report.to_table());
    Ok(())
}

/// ConvImager that owns its tokenizer, for loaded artifacts.
struct OwnedConvImager<'a> {
    tokenizer: PartialTokenizer,
    oracle: &'a CachedOracle,
}

impl vstar::conformance::Imager for OwnedConvImager<'_> {
    fn image(&self, raw: &str) -> Result<vstar::alphabet::TaggedString> {
        self.tokenizer.conv(raw, self.oracle)
    }

    fn raw_of(&self, image: &vstar::alphabet::TaggedString) -> String {
        self.tokenizer.erase(image)
    }
}

fn cmd_tokenize(args: &TokenizeArgs) -> Result<()> {
    let oracle = build_oracle(&args.oracle.oracle)?;
    let tokenizer: PartialTokenizer = match read_json::<PartialTokenizer>(&args.tokenizer) {
        Ok(t) => t,
        Err(_) => {
            let structure: StructureIn = read_json(&args.tokenizer)?;
            structure
                .tokenizer
                .ok_or_else(|| Error::Config("file holds no tokenizer".into()))?
        }
    };
    let text = match (&args.input, &args.text) {
        (Some(path), None) => {
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?
        }
        (None, Some(t)) => t.clone(),
        _ => return Err(Error::Config("need exactly one of --input or --text".into())),
    };
    let matches = tokenizer.tokenize(&text, &oracle, None)?;
    let chars: Vec<char> = text.chars().collect();
    for m in &matches {
        let lexeme: String = chars[m.start - 1..m.end].iter().collect();
        let side = match m.side {
            vstar::tokens::Side::Call => "call",
            vstar::tokens::Side::Return => "return",
        };
        println!("({}, {side}, {}, {}, {lexeme:?})", m.pair, m.start, m.end);
    }
    let image = tokenizer.conv_with_matches(&text, &matches);
    println!("{}", image.untag());
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Result<()> {
    let machine_file: SevpaFile = read_json(&args.machine)?;
    let machine = Sevpa::from_json(&machine_file)?;
    let grammar = machine.to_vpg()?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(args.out.display().to_string(), e))?;
    write_json(&args.out.join("grammar.json"), &grammar.to_json())?;
    write_text(&args.out.join("grammar.txt"), &grammar.to_text())?;
    println!("{}", grammar.to_text());
    Ok(())
}

fn cmd_infer_tags(args: &InferTagsArgs) -> Result<()> {
    let oracle = build_oracle(&args.oracle.oracle)?;
    let seeds = read_seed_file(&args.seeds)?;
    let cfg = TagInferConfig {
        k_cap: args.k_cap,
        limits: NestingLimits {
            max_frag: args.max_frag,
        },
    };
    match tag_infer(&oracle, &seeds, &cfg)? {
        Some(inference) => {
            println!("{}", serde_json::to_string_pretty(&inference.tagging)?);
            for p in &inference.patterns {
                println!(
                    "pattern seed={:?} u={:?} x={:?} z={:?} y={:?} v={:?} bound={}",
                    p.seed(),
                    p.u(),
                    p.x(),
                    p.z(),
                    p.y(),
                    p.v(),
                    p.validated_k()
                );
            }
            Ok(())
        }
        None => Err(Error::Config(format!(
            "no compatible tagging found within pumping bound cap {}",
            args.k_cap
        ))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Learn(args) => match cmd_learn(args) {
            Ok(true) => Ok(ExitCode::SUCCESS),
            Ok(false) => Ok(ExitCode::from(2)),
            Err(e) => Err(e),
        },
        Command::Eval(args) => cmd_eval(args).map(|_| ExitCode::SUCCESS),
        Command::Tokenize(args) => cmd_tokenize(args).map(|_| ExitCode::SUCCESS),
        Command::Export(args) => cmd_export(args).map(|_| ExitCode::SUCCESS),
        Command::InferTags(args) => cmd_infer_tags(args).map(|_| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
