//! Token-level structure inference: partial tokenizers with learned lexical
//! rules, repeatability-guarded tokenization, bracket insertion (`conv`),
//! and the backtracking search over candidate call/return token pairs.

use serde::{Deserialize, Serialize};

use crate::alphabet::{
    artificial_brackets, Alphabet, SymbolKind, TaggedAlphabet, TaggedString, TaggedSymbol,
};
use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::lstar::{lstar_learn, DfaTeacher, LstarBudget};
use crate::nesting::{candidate_nesting, NestingLimits, NestingPattern};
use crate::oracle::CachedOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Call,
    Return,
}

/// One recognized call or return token occurrence; positions are 1-based and
/// inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenMatch {
    pub pair: usize,
    pub side: Side,
    pub start: usize,
    pub end: usize,
}

/// One paired call/return token with its lexical rules and the generated
/// bracket symbols standing for it in converted strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenPair {
    pub call_sym: char,
    pub ret_sym: char,
    pub call: Dfa,
    pub ret: Dfa,
}

/// Recognizer for call and return tokens only; the syntax between them is
/// left to the automaton learner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialTokenizer {
    pub pairs: Vec<TokenPair>,
    pub k_rep: usize,
}

impl PartialTokenizer {
    /// Assigns bracket symbols disjoint from the base alphabet to each pair.
    pub fn assemble(lexical: Vec<(Dfa, Dfa)>, base: &Alphabet, k_rep: usize) -> PartialTokenizer {
        let symbols = artificial_brackets(base, lexical.len());
        let pairs = lexical
            .into_iter()
            .zip(symbols)
            .map(|((call, ret), (call_sym, ret_sym))| TokenPair {
                call_sym,
                ret_sym,
                call,
                ret,
            })
            .collect();
        PartialTokenizer { pairs, k_rep }
    }

    pub fn empty() -> PartialTokenizer {
        PartialTokenizer {
            pairs: Vec::new(),
            k_rep: 2,
        }
    }

    /// The extended alphabet of converted strings: bracket pairs plus every
    /// base character as plain.
    pub fn conv_alphabet(&self, base: &Alphabet) -> TaggedAlphabet {
        TaggedAlphabet::new(
            self.pairs.iter().map(|p| (p.call_sym, p.ret_sym)).collect(),
            base.iter(),
        )
    }

    /// Left-to-right scan emitting the first non-repeatable match at each
    /// position. Token order is fixed: pairs in order, call side before
    /// return side, longest match per token. A match that is k-repeatable in
    /// context is skipped as an incidental look-alike.
    pub fn tokenize(
        &self,
        s: &str,
        oracle: &CachedOracle,
        ctx: Option<(&str, &str)>,
    ) -> Result<Vec<TokenMatch>> {
        let chars: Vec<char> = s.chars().collect();
        let (left_ctx, right_ctx) = ctx.unwrap_or(("", ""));
        let mut matches = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let mut found = None;
            'tokens: for (pi, pair) in self.pairs.iter().enumerate() {
                for (side, dfa) in [(Side::Call, &pair.call), (Side::Return, &pair.ret)] {
                    if let Some(end) = dfa.longest_match(&chars, i) {
                        found = Some((pi, side, end));
                        break 'tokens;
                    }
                }
            }
            match found {
                Some((pair, side, end)) => {
                    let mut probe = String::with_capacity(
                        left_ctx.len() + s.len() + (end - i) * self.k_rep + right_ctx.len(),
                    );
                    probe.push_str(left_ctx);
                    probe.extend(&chars[..i]);
                    for _ in 0..self.k_rep {
                        probe.extend(&chars[i..end]);
                    }
                    probe.extend(&chars[end..]);
                    probe.push_str(right_ctx);
                    if oracle.query(&probe)? {
                        // repeatable: part of a plain token, not a bracket
                        i += 1;
                    } else {
                        matches.push(TokenMatch {
                            pair,
                            side,
                            start: i + 1,
                            end,
                        });
                        i = end;
                    }
                }
                None => i += 1,
            }
        }
        Ok(matches)
    }

    /// Inserts the bracket symbol of each match: call brackets immediately
    /// before the match, return brackets immediately after. All original
    /// characters stay plain.
    pub fn conv_with_matches(&self, s: &str, matches: &[TokenMatch]) -> TaggedString {
        let chars: Vec<char> = s.chars().collect();
        let mut out = TaggedString::empty();
        for (pos, &c) in chars.iter().enumerate() {
            for m in matches {
                if m.side == Side::Call && m.start - 1 == pos {
                    out.push(TaggedSymbol {
                        ch: self.pairs[m.pair].call_sym,
                        kind: SymbolKind::Call(m.pair),
                    });
                }
            }
            out.push(TaggedSymbol {
                ch: c,
                kind: SymbolKind::Plain,
            });
            for m in matches {
                if m.side == Side::Return && m.end == pos + 1 {
                    out.push(TaggedSymbol {
                        ch: self.pairs[m.pair].ret_sym,
                        kind: SymbolKind::Return(m.pair),
                    });
                }
            }
        }
        out
    }

    /// Tokenizes and converts in one step.
    pub fn conv(&self, s: &str, oracle: &CachedOracle) -> Result<TaggedString> {
        let matches = self.tokenize(s, oracle, None)?;
        Ok(self.conv_with_matches(s, &matches))
    }

    /// Removes inserted bracket symbols, recovering the raw string.
    pub fn erase(&self, s: &TaggedString) -> String {
        s.symbols()
            .iter()
            .filter(|sym| sym.kind == SymbolKind::Plain)
            .map(|sym| sym.ch)
            .collect()
    }

    /// The converted image of a fragment [lo, hi) of `s`: its characters
    /// plus any bracket anchored at a position inside the range.
    pub fn conv_slice(
        &self,
        s: &str,
        matches: &[TokenMatch],
        range: std::ops::Range<usize>,
    ) -> TaggedString {
        let chars: Vec<char> = s.chars().collect();
        let mut out = TaggedString::empty();
        for pos in range {
            for m in matches {
                if m.side == Side::Call && m.start - 1 == pos {
                    out.push(TaggedSymbol {
                        ch: self.pairs[m.pair].call_sym,
                        kind: SymbolKind::Call(m.pair),
                    });
                }
            }
            out.push(TaggedSymbol {
                ch: chars[pos],
                kind: SymbolKind::Plain,
            });
            for m in matches {
                if m.side == Side::Return && m.end == pos + 1 {
                    out.push(TaggedSymbol {
                        ch: self.pairs[m.pair].ret_sym,
                        kind: SymbolKind::Return(m.pair),
                    });
                }
            }
        }
        out
    }
}

/// True iff some bracket pair has an unmatched call in the converted image
/// of the pattern's x and an unmatched return of the same pair in y's image.
pub fn is_compatible_tokenizer(
    tokenizer: &PartialTokenizer,
    pattern: &NestingPattern,
    oracle: &CachedOracle,
) -> Result<bool> {
    let seed = pattern.seed();
    let matches = tokenizer.tokenize(&seed, oracle, None)?;
    let x_profile = tokenizer
        .conv_slice(&seed, &matches, pattern.x_range())
        .unmatched_profile();
    if x_profile.pending_calls.is_empty() {
        return Ok(false);
    }
    let y_profile = tokenizer
        .conv_slice(&seed, &matches, pattern.y_range())
        .unmatched_profile();
    Ok(x_profile
        .pending_calls
        .iter()
        .any(|p| y_profile.pending_returns.contains(p)))
}

#[derive(Debug, Clone)]
pub struct TokenInferConfig {
    pub k_cap: usize,
    pub limits: NestingLimits,
    pub k_rep: usize,
    /// Cap on simulated equivalence tests per token; overflowing candidates
    /// are rejected.
    pub max_eq_tests: usize,
    pub lstar_budget: LstarBudget,
}

impl Default for TokenInferConfig {
    fn default() -> Self {
        TokenInferConfig {
            k_cap: 6,
            limits: NestingLimits::default(),
            k_rep: 2,
            max_eq_tests: 10_000,
            lstar_budget: LstarBudget::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TokenInference {
    pub tokenizer: PartialTokenizer,
    pub patterns: Vec<NestingPattern>,
    pub bound_used: usize,
    /// Assumption-validator findings; failed checks warn, they do not abort.
    pub warnings: Vec<String>,
}

/// A candidate token occurrence: a span of x (or x^2) for the call side, of
/// y (or y^2) for the return side, with the host string context around it.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Anchor {
    span_str: String,
    left_ctx: String,
    right_ctx: String,
    /// Fragment whose prefix/suffix combinations simulate equivalence.
    fragment: String,
}

/// Spans ordered outermost first: start ascending, length descending.
fn spans(len: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for start in 0..len {
        for end in (start + 1..=len).rev() {
            out.push((start, end));
        }
    }
    out
}

fn substring(chars: &[char], lo: usize, hi: usize) -> String {
    chars[lo..hi].iter().collect()
}

/// Enumerates call-side anchors of a pattern: spans of x first, then spans
/// of x^2 that are not contained in the first copy.
fn call_anchors(pattern: &NestingPattern) -> Vec<Anchor> {
    let u = pattern.u();
    let x = pattern.x();
    let z = pattern.z();
    let y = pattern.y();
    let v = pattern.v();
    let x_chars: Vec<char> = x.chars().collect();
    let mut out = Vec::new();
    for (lo, hi) in spans(x_chars.len()) {
        out.push(Anchor {
            span_str: substring(&x_chars, lo, hi),
            left_ctx: format!("{u}{}", substring(&x_chars, 0, lo)),
            right_ctx: format!("{}{z}{y}{v}", substring(&x_chars, hi, x_chars.len())),
            fragment: x.clone(),
        });
    }
    let xx: Vec<char> = format!("{x}{x}").chars().collect();
    for (lo, hi) in spans(xx.len()) {
        if hi <= x_chars.len() {
            continue; // already covered by the single-copy enumeration
        }
        out.push(Anchor {
            span_str: substring(&xx, lo, hi),
            left_ctx: format!("{u}{}", substring(&xx, 0, lo)),
            right_ctx: format!("{}{z}{y}{y}{v}", substring(&xx, hi, xx.len())),
            fragment: format!("{x}{x}"),
        });
    }
    out
}

fn return_anchors(pattern: &NestingPattern) -> Vec<Anchor> {
    let u = pattern.u();
    let x = pattern.x();
    let z = pattern.z();
    let y = pattern.y();
    let v = pattern.v();
    let y_chars: Vec<char> = y.chars().collect();
    let mut out = Vec::new();
    for (lo, hi) in spans(y_chars.len()) {
        out.push(Anchor {
            span_str: substring(&y_chars, lo, hi),
            left_ctx: format!("{u}{x}{z}{}", substring(&y_chars, 0, lo)),
            right_ctx: format!("{}{v}", substring(&y_chars, hi, y_chars.len())),
            fragment: y.clone(),
        });
    }
    let yy: Vec<char> = format!("{y}{y}").chars().collect();
    for (lo, hi) in spans(yy.len()) {
        if hi <= y_chars.len() {
            continue;
        }
        out.push(Anchor {
            span_str: substring(&yy, lo, hi),
            left_ctx: format!("{u}{x}{x}{z}{}", substring(&yy, 0, lo)),
            right_ctx: format!("{}{v}", substring(&yy, hi, yy.len())),
            fragment: format!("{y}{y}"),
        });
    }
    out
}

/// Prefix-suffix combinations of the anchor fragment, used as simulated
/// equivalence tests for the lexical learner.
fn equivalence_tests(fragment: &str, cap: usize) -> Vec<String> {
    let chars: Vec<char> = fragment.chars().collect();
    let mut out = Vec::new();
    for i in 0..=chars.len() {
        for j in 0..=chars.len() {
            let mut t: String = chars[..i].iter().collect();
            t.extend(&chars[j..]);
            if !out.contains(&t) {
                out.push(t);
            }
            if out.len() >= cap {
                return out;
            }
        }
    }
    out
}

/// Learns the lexical rule of one token side by running the regular-language
/// learner against membership in the anchor's context. Rejects candidates
/// whose learner fails to converge or whose result misses the witness span.
fn learn_token_side(
    oracle: &CachedOracle,
    anchor: &Anchor,
    alphabet: &[char],
    cfg: &TokenInferConfig,
) -> Result<Option<Dfa>> {
    let tests = equivalence_tests(&anchor.fragment, cfg.max_eq_tests);
    let mut member = |w: &str| {
        let mut q =
            String::with_capacity(anchor.left_ctx.len() + w.len() + anchor.right_ctx.len());
        q.push_str(&anchor.left_ctx);
        q.push_str(w);
        q.push_str(&anchor.right_ctx);
        oracle.query(&q)
    };
    let outcome = lstar_learn(
        &mut member,
        alphabet,
        DfaTeacher::Tests(&tests),
        cfg.lstar_budget,
    )?;
    if !outcome.converged || !outcome.dfa.accepts(&anchor.span_str) {
        return Ok(None);
    }
    Ok(Some(outcome.dfa))
}

struct TokenSearch<'a> {
    oracle: &'a CachedOracle,
    seeds: &'a [String],
    base: Alphabet,
    lstar_alphabet: Vec<char>,
    cfg: &'a TokenInferConfig,
}

impl TokenSearch<'_> {
    fn tokenizer_from(&self, lexical: &[(Dfa, Dfa)]) -> PartialTokenizer {
        PartialTokenizer::assemble(lexical.to_vec(), &self.base, self.cfg.k_rep)
    }

    fn seeds_convert_well_matched(&self, tokenizer: &PartialTokenizer) -> Result<bool> {
        for seed in self.seeds {
            if !tokenizer.conv(seed, self.oracle)?.is_well_matched() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn compatible_with_all(
        &self,
        tokenizer: &PartialTokenizer,
        patterns: &[NestingPattern],
    ) -> Result<bool> {
        for p in patterns {
            if !is_compatible_tokenizer(tokenizer, p, self.oracle)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn search(
        &self,
        pending: &[NestingPattern],
        done: &mut Vec<NestingPattern>,
        lexical: &mut Vec<(Dfa, Dfa)>,
    ) -> Result<Option<Vec<(Dfa, Dfa)>>> {
        let Some((pattern, rest)) = pending.split_first() else {
            return Ok(Some(lexical.clone()));
        };
        let current = self.tokenizer_from(lexical);
        if is_compatible_tokenizer(&current, pattern, self.oracle)? {
            done.push(pattern.clone());
            let result = self.search(rest, done, lexical);
            done.pop();
            return result;
        }
        // learn each side lazily per anchor; failures are cached as None
        let call_anchors = call_anchors(pattern);
        let return_anchors = return_anchors(pattern);
        let mut call_results: Vec<Option<Option<Dfa>>> = vec![None; call_anchors.len()];
        let mut return_results: Vec<Option<Option<Dfa>>> = vec![None; return_anchors.len()];
        for (ci, call_anchor) in call_anchors.iter().enumerate() {
            if call_results[ci].is_none() {
                call_results[ci] = Some(learn_token_side(
                    self.oracle,
                    call_anchor,
                    &self.lstar_alphabet,
                    self.cfg,
                )?);
            }
            let Some(Some(call_dfa)) = call_results[ci].clone() else {
                continue;
            };
            for (ri, return_anchor) in return_anchors.iter().enumerate() {
                if return_results[ri].is_none() {
                    return_results[ri] = Some(learn_token_side(
                        self.oracle,
                        return_anchor,
                        &self.lstar_alphabet,
                        self.cfg,
                    )?);
                }
                let Some(Some(return_dfa)) = return_results[ri].clone() else {
                    continue;
                };
                lexical.push((call_dfa.clone(), return_dfa));
                let candidate = self.tokenizer_from(lexical);
                let mut probe = done.clone();
                probe.push(pattern.clone());
                if self.seeds_convert_well_matched(&candidate)?
                    && self.compatible_with_all(&candidate, &probe)?
                {
                    done.push(pattern.clone());
                    if let Some(result) = self.search(rest, done, lexical)? {
                        return Ok(Some(result));
                    }
                    done.pop();
                }
                lexical.pop();
            }
        }
        Ok(None)
    }
}

/// Infers a partial tokenizer covering all nesting patterns of the seeds,
/// escalating the pumping bound up to the cap. Returns `None` when no
/// compatible tokenizer is found within the cap.
pub fn token_infer(
    oracle: &CachedOracle,
    seeds: &[String],
    cfg: &TokenInferConfig,
) -> Result<Option<TokenInference>> {
    for seed in seeds {
        if !oracle.query(seed)? {
            return Err(Error::SeedRejected(seed.clone()));
        }
    }
    let base = Alphabet::from_strings(seeds)?;
    let lstar_alphabet: Vec<char> = base.iter().collect();
    for bound in 2..=cfg.k_cap.max(2) {
        let patterns = candidate_nesting(oracle, seeds, bound, cfg.limits)?;
        let searcher = TokenSearch {
            oracle,
            seeds,
            base: base.clone(),
            lstar_alphabet: lstar_alphabet.clone(),
            cfg,
        };
        let mut done = Vec::new();
        let mut lexical = Vec::new();
        if let Some(result) = searcher.search(&patterns, &mut done, &mut lexical)? {
            let tokenizer = PartialTokenizer::assemble(result, &base, cfg.k_rep);
            let warnings = validate_assumptions(&tokenizer, seeds, oracle)?;
            return Ok(Some(TokenInference {
                tokenizer,
                patterns,
                bound_used: bound,
                warnings,
            }));
        }
    }
    Ok(None)
}

/// Executable checks of the tokenizer-model assumptions over the seeds and
/// the learned rules. Violations come back as warnings.
pub fn validate_assumptions(
    tokenizer: &PartialTokenizer,
    seeds: &[String],
    oracle: &CachedOracle,
) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    // Separation: lexical languages of different tokens must not overlap.
    let mut all_sides: Vec<(String, &Dfa)> = Vec::new();
    for (i, pair) in tokenizer.pairs.iter().enumerate() {
        all_sides.push((format!("call token {i}"), &pair.call));
        all_sides.push((format!("return token {i}"), &pair.ret));
    }
    for i in 0..all_sides.len() {
        for j in (i + 1)..all_sides.len() {
            if all_sides[i].1.intersects(all_sides[j].1) {
                warnings.push(format!(
                    "separation: {} and {} share strings",
                    all_sides[i].0, all_sides[j].0
                ));
            }
        }
    }
    // Exclusivity: a shortest token string should not contain a proper
    // prefix of itself as an infix (single-character tokens exempt).
    for (name, dfa) in &all_sides {
        if let Some(word) = dfa.shortest_word() {
            let chars: Vec<char> = word.chars().collect();
            if chars.len() > 1 {
                for plen in 1..chars.len() {
                    let prefix: String = chars[..plen].iter().collect();
                    let interior: String = chars[1..].iter().collect();
                    if interior.contains(&prefix) {
                        warnings.push(format!(
                            "exclusivity: prefix {prefix:?} of {name} recurs as an infix of {word:?}"
                        ));
                        break;
                    }
                }
            }
        }
    }
    // Tokenization consistency: concatenating the tokens recognized in each
    // seed must tokenize back to the same list.
    for seed in seeds {
        let matches = tokenizer.tokenize(seed, oracle, None)?;
        let chars: Vec<char> = seed.chars().collect();
        let token_concat: String = matches
            .iter()
            .map(|m| chars[m.start - 1..m.end].iter().collect::<String>())
            .collect();
        if token_concat.is_empty() {
            continue;
        }
        let rescan = tokenizer.tokenize(&token_concat, oracle, None)?;
        let same_kinds = rescan.len() == matches.len()
            && rescan
                .iter()
                .zip(&matches)
                .all(|(a, b)| a.pair == b.pair && a.side == b.side);
        if !same_kinds {
            warnings.push(format!(
                "tokenization consistency: token concatenation of seed {seed:?} re-tokenizes differently"
            ));
        }
    }
    Ok(warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brace_tokenizer() -> PartialTokenizer {
        let alphabet: Vec<char> = "{}\":truefalse0123456789".chars().collect();
        let call = Dfa::literal("{", &alphabet);
        let ret = Dfa::literal("}", &alphabet);
        PartialTokenizer::assemble(
            vec![(call, ret)],
            &Alphabet::new(alphabet.clone()).unwrap(),
            2,
        )
    }

    /// Small hand-rolled JSON-flavored validator: objects, string keys over
    /// arbitrary non-quote characters, true/false values.
    fn json_oracle() -> CachedOracle {
        fn value(s: &[char], i: usize) -> Option<usize> {
            if s[i..].starts_with(&['t', 'r', 'u', 'e']) {
                return Some(i + 4);
            }
            if s[i..].starts_with(&['f', 'a', 'l', 's', 'e']) {
                return Some(i + 5);
            }
            object(s, i)
        }
        fn object(s: &[char], i: usize) -> Option<usize> {
            if s.get(i) != Some(&'{') {
                return None;
            }
            let mut i = i + 1;
            if s.get(i) == Some(&'}') {
                return Some(i + 1);
            }
            loop {
                if s.get(i) != Some(&'"') {
                    return None;
                }
                i += 1;
                while s.get(i).is_some_and(|&c| c != '"') {
                    i += 1;
                }
                if s.get(i) != Some(&'"') {
                    return None;
                }
                i += 1;
                if s.get(i) != Some(&':') {
                    return None;
                }
                i = value(s, i + 1)?;
                match s.get(i) {
                    Some(&',') => i += 1,
                    Some(&'}') => return Some(i + 1),
                    _ => return None,
                }
            }
        }
        CachedOracle::from_fn(|s: &str| {
            let chars: Vec<char> = s.chars().collect();
            value(&chars, 0) == Some(chars.len())
        })
    }

    #[test]
    fn tokenize_skips_repeatable_brace_in_key() {
        let oracle = json_oracle();
        assert!(oracle.query(r#"{"{":true}"#).unwrap());
        let d = brace_tokenizer();
        let matches = d.tokenize(r#"{"{":true}"#, &oracle, None).unwrap();
        assert_eq!(
            matches,
            vec![
                TokenMatch { pair: 0, side: Side::Call, start: 1, end: 1 },
                TokenMatch { pair: 0, side: Side::Return, start: 10, end: 10 },
            ]
        );
    }

    #[test]
    fn tokenize_doubled_brace_key() {
        let oracle = json_oracle();
        let d = brace_tokenizer();
        let matches = d.tokenize(r#"{"{{":true}"#, &oracle, None).unwrap();
        assert_eq!(
            matches,
            vec![
                TokenMatch { pair: 0, side: Side::Call, start: 1, end: 1 },
                TokenMatch { pair: 0, side: Side::Return, start: 11, end: 11 },
            ]
        );
    }

    #[test]
    fn empty_tokenizer_finds_nothing() {
        let oracle = json_oracle();
        let d = PartialTokenizer::empty();
        assert!(d.tokenize("{}", &oracle, None).unwrap().is_empty());
    }

    #[test]
    fn conv_inserts_brackets_around_tokens() {
        let oracle = json_oracle();
        let d = brace_tokenizer();
        let image = d.conv(r#"{"{":true}"#, &oracle).unwrap();
        let call_sym = d.pairs[0].call_sym;
        let ret_sym = d.pairs[0].ret_sym;
        let expected: String = format!(r#"{call_sym}{{"{{":true}}{ret_sym}"#);
        assert_eq!(image.untag(), expected);
        assert!(image.is_well_matched());
        assert_eq!(d.erase(&image), r#"{"{":true}"#);
    }

    #[test]
    fn conv_of_unmatched_input_is_not_well_matched() {
        let oracle = json_oracle();
        let d = brace_tokenizer();
        let image = d.conv(r#"{"k":true"#, &oracle).unwrap();
        assert!(!image.is_well_matched());
    }

    #[test]
    fn conv_slice_keeps_anchored_brackets() {
        let oracle = json_oracle();
        let d = brace_tokenizer();
        let s = r#"{"k":true}"#;
        let matches = d.tokenize(s, &oracle, None).unwrap();
        let x_slice = d.conv_slice(s, &matches, 0..1);
        assert_eq!(x_slice.unmatched_profile().pending_calls, vec![0]);
        let y_slice = d.conv_slice(s, &matches, 9..10);
        assert_eq!(y_slice.unmatched_profile().pending_returns, vec![0]);
    }

    #[test]
    fn spans_are_ordered_outermost_first() {
        assert_eq!(spans(2), vec![(0, 2), (0, 1), (1, 2)]);
    }

    #[test]
    fn equivalence_tests_combine_prefixes_and_suffixes() {
        let tests = equivalence_tests("ab", 100);
        assert!(tests.contains(&"".to_string()));
        assert!(tests.contains(&"ab".to_string()));
        assert!(tests.contains(&"aab".to_string()));
        assert!(tests.contains(&"abab".to_string()));
    }
}
