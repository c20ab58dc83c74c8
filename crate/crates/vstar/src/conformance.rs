//! Simulated equivalence queries: seed-derived test corpora built from
//! prefix/infix/suffix combinations, and a perfect-teacher strategy backed
//! by an in-process reference grammar.

use std::collections::BTreeSet;

use crate::alphabet::{TaggedAlphabet, TaggedString};
use crate::error::{Error, Result};
use crate::grammar::Vpg;
use crate::learner::{Counterexample, Hypothesis};
use crate::machine::RunOutcome;
use crate::oracle::{CachedOracle, TaggedOracle};
use crate::tokens::PartialTokenizer;

/// Maps a raw candidate string to the tagged string the machine runs on.
pub trait Imager {
    fn image(&self, raw: &str) -> Result<TaggedString>;
    /// Inverse direction: the raw string behind a machine-level string.
    fn raw_of(&self, image: &TaggedString) -> String;
}

/// Character mode: the image is the tagging of the raw string.
pub struct CharImager<'a> {
    pub alphabet: &'a TaggedAlphabet,
}

impl Imager for CharImager<'_> {
    fn image(&self, raw: &str) -> Result<TaggedString> {
        self.alphabet.tag(raw)
    }

    fn raw_of(&self, image: &TaggedString) -> String {
        image.untag()
    }
}

/// Token mode: the image is the bracket-insertion conversion, which issues
/// repeatability probes through the oracle.
pub struct ConvImager<'a> {
    pub tokenizer: &'a PartialTokenizer,
    pub oracle: &'a CachedOracle,
}

impl Imager for ConvImager<'_> {
    fn image(&self, raw: &str) -> Result<TaggedString> {
        self.tokenizer.conv(raw, self.oracle)
    }

    fn raw_of(&self, image: &TaggedString) -> String {
        self.tokenizer.erase(image)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusLimits {
    /// Upper bound on each fragment's length.
    pub max_fragment: usize,
    /// Upper bound on the number of kept corpus strings.
    pub max_corpus: usize,
    /// Number of infix fragments between prefix and suffix (0 to 2); each
    /// may be empty, so higher counts subsume lower ones.
    pub infixes: usize,
}

impl Default for CorpusLimits {
    fn default() -> Self {
        CorpusLimits {
            max_fragment: 20,
            max_corpus: 100_000,
            infixes: 1,
        }
    }
}

/// One candidate test string with its machine-level image and the fragment
/// recipe it was assembled from.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub raw: String,
    pub image: TaggedString,
    pub recipe: String,
}

/// Deduplicated, well-matched-filtered test strings in scan order: the full
/// seeds first, then fragment combinations by total length, then
/// lexicographically.
#[derive(Debug, Default)]
pub struct TestCorpus {
    pub entries: Vec<CorpusEntry>,
}

impl TestCorpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn fragment_buckets(fragments: BTreeSet<String>, max_len: usize) -> Vec<Vec<String>> {
    let mut buckets: Vec<Vec<String>> = vec![Vec::new(); max_len + 1];
    for f in fragments {
        let len = f.chars().count();
        if len <= max_len {
            buckets[len].push(f);
        }
    }
    buckets
}

/// Builds the corpus: u·x₁(·x₂)·v for prefixes u, infixes xᵢ, suffixes v of
/// the seeds, keeping strings whose image is well-matched, up to the caps.
pub fn build_corpus(
    seeds: &[String],
    imager: &dyn Imager,
    limits: &CorpusLimits,
) -> Result<TestCorpus> {
    if seeds.is_empty() {
        return Err(Error::Config("seed set is empty".into()));
    }
    let mut corpus = TestCorpus::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();

    // the full seeds always participate, regardless of fragment caps
    for (i, seed) in seeds.iter().enumerate() {
        if corpus.entries.len() >= limits.max_corpus {
            return Ok(corpus);
        }
        if !seen.insert(seed.clone()) {
            continue;
        }
        let image = imager.image(seed)?;
        if image.is_well_matched() {
            corpus.entries.push(CorpusEntry {
                raw: seed.clone(),
                image,
                recipe: format!("seed[{i}]"),
            });
        }
    }

    let mut prefixes: BTreeSet<String> = BTreeSet::new();
    let mut infixes: BTreeSet<String> = BTreeSet::new();
    let mut suffixes: BTreeSet<String> = BTreeSet::new();
    for seed in seeds {
        let chars: Vec<char> = seed.chars().collect();
        let n = chars.len();
        for end in 0..=n.min(limits.max_fragment) {
            prefixes.insert(chars[..end].iter().collect());
        }
        for start in n.saturating_sub(limits.max_fragment)..=n {
            suffixes.insert(chars[start..].iter().collect());
        }
        infixes.insert(String::new());
        if limits.infixes > 0 {
            for start in 0..n {
                for len in 1..=limits.max_fragment.min(n - start) {
                    infixes.insert(chars[start..start + len].iter().collect());
                }
            }
        }
    }
    let p_buckets = fragment_buckets(prefixes, limits.max_fragment);
    let i_buckets = fragment_buckets(infixes, limits.max_fragment);
    let s_buckets = fragment_buckets(suffixes, limits.max_fragment);
    let infix_slots = limits.infixes.min(2);
    let slots = 2 + infix_slots;

    // length splits of `total` over the slots, first slot slowest
    fn length_splits(slots: usize, total: usize, max_len: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(
            slots: usize,
            total: usize,
            max_len: usize,
            cur: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if slots == 1 {
                if total <= max_len {
                    cur.push(total);
                    out.push(cur.clone());
                    cur.pop();
                }
                return;
            }
            for first in 0..=total.min(max_len) {
                cur.push(first);
                rec(slots - 1, total - first, max_len, cur, out);
                cur.pop();
            }
        }
        rec(slots, total, max_len, &mut cur, &mut out);
        out
    }

    'outer: for total in 0..=limits.max_fragment * slots {
        for combo in length_splits(slots, total, limits.max_fragment) {
            let mut parts: Vec<&[String]> = Vec::with_capacity(slots);
            parts.push(&p_buckets[combo[0]]);
            for slot in 0..infix_slots {
                parts.push(&i_buckets[combo[1 + slot]]);
            }
            parts.push(&s_buckets[combo[slots - 1]]);
            if parts.iter().any(|b| b.is_empty()) {
                continue;
            }
            let mut idx = vec![0usize; slots];
            'combos: loop {
                let raw: String = idx
                    .iter()
                    .zip(&parts)
                    .map(|(&i, bucket)| bucket[i].as_str())
                    .collect();
                if seen.insert(raw.clone()) {
                    let image = imager.image(&raw)?;
                    if image.is_well_matched() {
                        if corpus.entries.len() >= limits.max_corpus {
                            break 'outer;
                        }
                        let recipe = idx
                            .iter()
                            .zip(&parts)
                            .map(|(&i, bucket)| format!("{:?}", bucket[i]))
                            .collect::<Vec<_>>()
                            .join("+");
                        corpus.entries.push(CorpusEntry { raw, image, recipe });
                    }
                }
                // odometer, last slot fastest
                for slot in (0..slots).rev() {
                    idx[slot] += 1;
                    if idx[slot] < parts[slot].len() {
                        continue 'combos;
                    }
                    idx[slot] = 0;
                }
                break;
            }
        }
    }
    Ok(corpus)
}

/// How counterexamples are produced for the learn loop.
pub enum EquivalenceStrategy {
    /// Exhaustive comparison against a reference grammar on every raw string
    /// up to the length bound. A true equivalence oracle for bounded length.
    PerfectTeacher { reference: Vpg, max_len: usize },
    /// Scan of a prebuilt seed-combination corpus.
    SeedCombination { corpus: TestCorpus },
}

impl EquivalenceStrategy {
    pub fn seed_combination(
        seeds: &[String],
        imager: &dyn Imager,
        limits: &CorpusLimits,
    ) -> Result<EquivalenceStrategy> {
        Ok(EquivalenceStrategy::SeedCombination {
            corpus: build_corpus(seeds, imager, limits)?,
        })
    }

    pub fn corpus_size(&self) -> usize {
        match self {
            EquivalenceStrategy::PerfectTeacher { .. } => 0,
            EquivalenceStrategy::SeedCombination { corpus } => corpus.len(),
        }
    }

    /// First disagreement between hypothesis and oracle, re-verified before
    /// being returned.
    pub fn find_counterexample(
        &self,
        hyp: &Hypothesis,
        imager: &dyn Imager,
        oracle: &dyn TaggedOracle,
    ) -> Result<Option<Counterexample>> {
        match self {
            EquivalenceStrategy::PerfectTeacher { reference, max_len } => {
                let chars: Vec<char> = reference
                    .alphabet()
                    .pairs()
                    .iter()
                    .flat_map(|&(a, b)| [a, b])
                    .chain(reference.alphabet().plains().iter().copied())
                    .collect();
                let mut frontier = vec![String::new()];
                for len in 0..=*max_len {
                    for raw in &frontier {
                        let ref_v = match reference.alphabet().tag(raw) {
                            Ok(tagged) => reference.recognizes(&tagged),
                            Err(_) => false,
                        };
                        let image = imager.image(raw)?;
                        let hyp_v = hyp.machine.run(&image)? == RunOutcome::Accept;
                        if hyp_v != ref_v {
                            return Ok(Some(Counterexample {
                                raw: raw.clone(),
                                tagged: image,
                                verdict_oracle: ref_v,
                                verdict_hypothesis: hyp_v,
                            }));
                        }
                    }
                    if len == *max_len {
                        break;
                    }
                    let mut next = Vec::with_capacity(frontier.len() * chars.len());
                    for s in &frontier {
                        for &c in &chars {
                            let mut sc = s.clone();
                            sc.push(c);
                            next.push(sc);
                        }
                    }
                    frontier = next;
                }
                Ok(None)
            }
            EquivalenceStrategy::SeedCombination { corpus } => {
                for entry in &corpus.entries {
                    let hyp_v = hyp.machine.run(&entry.image)? == RunOutcome::Accept;
                    let oracle_v = oracle.raw_member(&entry.raw)?;
                    if hyp_v != oracle_v {
                        // soundness re-check before surfacing
                        debug_assert_ne!(
                            hyp.machine.run(&entry.image)? == RunOutcome::Accept,
                            oracle.raw_member(&entry.raw)?
                        );
                        return Ok(Some(Counterexample {
                            raw: entry.raw.clone(),
                            tagged: entry.image.clone(),
                            verdict_oracle: oracle_v,
                            verdict_hypothesis: hyp_v,
                        }));
                    }
                }
                Ok(None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Tagging;

    fn fig1_imager_alphabet() -> TaggedAlphabet {
        let alphabet = crate::alphabet::Alphabet::new("abcdgh".chars()).unwrap();
        let tagging = Tagging::new([('a', 'b')]).unwrap();
        TaggedAlphabet::from_tagging(&alphabet, &tagging)
    }

    #[test]
    fn corpus_contains_full_seeds_and_combinations() {
        let alphabet = fig1_imager_alphabet();
        let imager = CharImager { alphabet: &alphabet };
        let seeds = vec!["agcdcdhbcd".to_string()];
        let corpus = build_corpus(&seeds, &imager, &CorpusLimits::default()).unwrap();
        let raws: Vec<&str> = corpus.entries.iter().map(|e| e.raw.as_str()).collect();
        assert!(raws.contains(&"agcdcdhbcd"));
        // prefix "ag" + infix "cd" + suffix "hbcd"
        assert!(raws.contains(&"agcdhbcd"));
        // strings with a pending call are filtered out
        assert!(!raws.contains(&"agcd"));
    }

    #[test]
    fn corpus_respects_cap() {
        let alphabet = fig1_imager_alphabet();
        let imager = CharImager { alphabet: &alphabet };
        let seeds = vec!["agcdcdhbcd".to_string()];
        let limits = CorpusLimits {
            max_corpus: 1,
            ..CorpusLimits::default()
        };
        let corpus = build_corpus(&seeds, &imager, &limits).unwrap();
        assert_eq!(corpus.len(), 1);
    }

    #[test]
    fn corpus_is_deterministic() {
        let alphabet = fig1_imager_alphabet();
        let imager = CharImager { alphabet: &alphabet };
        let seeds = vec!["agcdcdhbcd".to_string(), "agagcdhbhbcd".to_string()];
        let limits = CorpusLimits {
            max_corpus: 2000,
            ..CorpusLimits::default()
        };
        let a = build_corpus(&seeds, &imager, &limits).unwrap();
        let b = build_corpus(&seeds, &imager, &limits).unwrap();
        let ra: Vec<&String> = a.entries.iter().map(|e| &e.raw).collect();
        let rb: Vec<&String> = b.entries.iter().map(|e| &e.raw).collect();
        assert_eq!(ra, rb);
    }
}
