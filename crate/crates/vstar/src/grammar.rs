//! Well-matched visibly pushdown grammars: data model, a linear-time
//! reference recognizer, random sampling, and import/export.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{SymbolKind, TaggedAlphabet, TaggedString};
use crate::error::{Error, Result};

/// One production. Every rule has one of the three well-matched forms:
/// empty, linear with a plain character, or matching with a call/return pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Empty,
    Linear { plain: char, next: usize },
    Matching { pair: usize, inner: usize, next: usize },
}

/// A well-matched visibly pushdown grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vpg {
    alphabet: TaggedAlphabet,
    nonterminals: Vec<String>,
    start: usize,
    rules: Vec<Vec<Rule>>,
}

impl Vpg {
    pub fn new(
        alphabet: TaggedAlphabet,
        nonterminals: Vec<String>,
        start: usize,
        rules: Vec<Vec<Rule>>,
    ) -> Result<Self> {
        let g = Vpg {
            alphabet,
            nonterminals,
            start,
            rules,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let n = self.nonterminals.len();
        if self.rules.len() != n {
            return Err(Error::MalformedGrammar(
                "rule table size does not match nonterminal count".into(),
            ));
        }
        if self.start >= n {
            return Err(Error::MalformedGrammar("start nonterminal undeclared".into()));
        }
        let mut names = BTreeSet::new();
        for name in &self.nonterminals {
            if !names.insert(name) {
                return Err(Error::MalformedGrammar(format!(
                    "duplicate nonterminal {name}"
                )));
            }
        }
        for rules in &self.rules {
            for rule in rules {
                match *rule {
                    Rule::Empty => {}
                    Rule::Linear { plain, next } => {
                        if !self.alphabet.plains().contains(&plain) {
                            return Err(Error::MalformedGrammar(format!(
                                "linear rule uses non-plain character {plain:?}"
                            )));
                        }
                        if next >= n {
                            return Err(Error::MalformedGrammar(
                                "linear rule references undeclared nonterminal".into(),
                            ));
                        }
                    }
                    Rule::Matching { pair, inner, next } => {
                        if pair >= self.alphabet.k() {
                            return Err(Error::MalformedGrammar(
                                "matching rule references undeclared pair".into(),
                            ));
                        }
                        if inner >= n || next >= n {
                            return Err(Error::MalformedGrammar(
                                "matching rule references undeclared nonterminal".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &TaggedAlphabet {
        &self.alphabet
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn rules_of(&self, nt: usize) -> &[Rule] {
        &self.rules[nt]
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().map(|r| r.len()).sum()
    }

    /// True iff the tagged string derives from the start nonterminal.
    ///
    /// Single left-to-right pass keeping, per nesting level, the set of
    /// (level entry, currently active) nonterminal pairs; cost is
    /// O(|s| * |V|^2). Strings that are not well-matched or use symbols
    /// outside the grammar alphabet are never derivable.
    pub fn recognizes(&self, s: &TaggedString) -> bool {
        if !s.is_well_matched() {
            return false;
        }
        for sym in s.symbols() {
            if self.alphabet.kind_of(sym.ch) != Some(sym.kind) {
                return false;
            }
        }
        // (entry, active) pairs for the current level
        let mut active: BTreeSet<(usize, usize)> = BTreeSet::new();
        active.insert((self.start, self.start));
        // each frame holds (outer entry, inner start, continuation) triples
        let mut stack: Vec<Vec<(usize, usize, usize)>> = Vec::new();
        for sym in s.symbols() {
            match sym.kind {
                SymbolKind::Plain => {
                    let mut next_active = BTreeSet::new();
                    for &(e, l) in &active {
                        for rule in &self.rules[l] {
                            if let Rule::Linear { plain, next } = *rule {
                                if plain == sym.ch {
                                    next_active.insert((e, next));
                                }
                            }
                        }
                    }
                    active = next_active;
                }
                SymbolKind::Call(p) => {
                    let mut frame = Vec::new();
                    let mut next_active = BTreeSet::new();
                    for &(e, l) in &active {
                        for rule in &self.rules[l] {
                            if let Rule::Matching { pair, inner, next } = *rule {
                                if pair == p {
                                    frame.push((e, inner, next));
                                    next_active.insert((inner, inner));
                                }
                            }
                        }
                    }
                    stack.push(frame);
                    active = next_active;
                }
                SymbolKind::Return(_) => {
                    let frame = match stack.pop() {
                        Some(f) => f,
                        None => return false, // unreachable on well-matched input
                    };
                    let completed: BTreeSet<usize> = active
                        .iter()
                        .filter(|&&(_, l)| self.rules[l].contains(&Rule::Empty))
                        .map(|&(e, _)| e)
                        .collect();
                    let mut next_active = BTreeSet::new();
                    for &(e, inner, next) in &frame {
                        if completed.contains(&inner) {
                            next_active.insert((e, next));
                        }
                    }
                    active = next_active;
                }
            }
            if active.is_empty() {
                return false;
            }
        }
        stack.is_empty()
            && active
                .iter()
                .any(|&(_, l)| self.rules[l].contains(&Rule::Empty))
    }

    /// Minimal completion cost (emitted terminal count) per nonterminal;
    /// `None` when the nonterminal has no terminating derivation.
    fn completion_costs(&self) -> Vec<Option<usize>> {
        let n = self.nonterminals.len();
        let mut cost: Vec<Option<usize>> = vec![None; n];
        loop {
            let mut changed = false;
            for nt in 0..n {
                for rule in &self.rules[nt] {
                    let candidate = match *rule {
                        Rule::Empty => Some(0),
                        Rule::Linear { next, .. } => cost[next].map(|c| c + 1),
                        Rule::Matching { inner, next, .. } => match (cost[inner], cost[next]) {
                            (Some(a), Some(b)) => Some(a + b + 2),
                            _ => None,
                        },
                    };
                    if let Some(c) = candidate {
                        if cost[nt].map_or(true, |old| c < old) {
                            cost[nt] = Some(c);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return cost;
            }
        }
    }

    fn rule_cost(&self, rule: &Rule, costs: &[Option<usize>]) -> Option<usize> {
        match *rule {
            Rule::Empty => Some(0),
            Rule::Linear { next, .. } => costs[next].map(|c| c + 1),
            Rule::Matching { inner, next, .. } => match (costs[inner], costs[next]) {
                (Some(a), Some(b)) => Some(a + b + 2),
                _ => None,
            },
        }
    }

    /// Draws `n` strings by random rule expansion. Past `max_depth` the
    /// expansion is restricted to rules with minimal remaining completion
    /// cost, which forces termination. Deterministic for a fixed RNG.
    pub fn sample<R: Rng>(&self, n: usize, max_depth: usize, rng: &mut R) -> Result<Vec<TaggedString>> {
        let costs = self.completion_costs();
        if costs[self.start].is_none() {
            return Err(Error::UnproductiveGrammar);
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut buf = TaggedString::empty();
            self.expand(self.start, 0, max_depth, &costs, rng, &mut buf);
            out.push(buf);
        }
        Ok(out)
    }

    fn expand<R: Rng>(
        &self,
        nt: usize,
        depth: usize,
        max_depth: usize,
        costs: &[Option<usize>],
        rng: &mut R,
        buf: &mut TaggedString,
    ) {
        let viable: Vec<&Rule> = self.rules[nt]
            .iter()
            .filter(|r| self.rule_cost(r, costs).is_some())
            .collect();
        debug_assert!(!viable.is_empty());
        let rule = if depth >= max_depth {
            let best = viable
                .iter()
                .filter_map(|r| self.rule_cost(r, costs))
                .min()
                .unwrap();
            let minimal: Vec<&&Rule> = viable
                .iter()
                .filter(|r| self.rule_cost(r, costs) == Some(best))
                .collect();
            **minimal.choose(rng).unwrap()
        } else {
            *viable.choose(rng).unwrap()
        };
        match *rule {
            Rule::Empty => {}
            Rule::Linear { plain, next } => {
                buf.push(self.alphabet.plain_symbol(plain));
                self.expand(next, depth + 1, max_depth, costs, rng, buf);
            }
            Rule::Matching { pair, inner, next } => {
                buf.push(self.alphabet.call_symbol(pair));
                self.expand(inner, depth + 1, max_depth, costs, rng, buf);
                buf.push(self.alphabet.return_symbol(pair));
                self.expand(next, depth + 1, max_depth, costs, rng, buf);
            }
        }
    }

    /// Human-readable export, one rule per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (nt, rules) in self.rules.iter().enumerate() {
            for rule in rules {
                let head = &self.nonterminals[nt];
                match *rule {
                    Rule::Empty => writeln!(out, "{head} -> eps").unwrap(),
                    Rule::Linear { plain, next } => {
                        writeln!(out, "{head} -> {plain} {}", self.nonterminals[next]).unwrap()
                    }
                    Rule::Matching { pair, inner, next } => writeln!(
                        out,
                        "{head} -> <{} {} {}> {}",
                        self.alphabet.call_char(pair),
                        self.nonterminals[inner],
                        self.alphabet.return_char(pair),
                        self.nonterminals[next],
                    )
                    .unwrap(),
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> VpgFile {
        let mut rules = Vec::new();
        for (nt, nt_rules) in self.rules.iter().enumerate() {
            for rule in nt_rules {
                let head = self.nonterminals[nt].clone();
                rules.push(match *rule {
                    Rule::Empty => RuleFile::Empty { head },
                    Rule::Linear { plain, next } => RuleFile::Linear {
                        head,
                        plain,
                        next: self.nonterminals[next].clone(),
                    },
                    Rule::Matching { pair, inner, next } => RuleFile::Matching {
                        head,
                        call: self.alphabet.call_char(pair),
                        ret: self.alphabet.return_char(pair),
                        inner: self.nonterminals[inner].clone(),
                        next: self.nonterminals[next].clone(),
                    },
                });
            }
        }
        VpgFile {
            pairs: self.alphabet.pairs().to_vec(),
            plain: self.alphabet.plains().to_vec(),
            start: self.nonterminals[self.start].clone(),
            rules,
        }
    }

    pub fn from_json(file: &VpgFile) -> Result<Vpg> {
        let alphabet = TaggedAlphabet::new(file.pairs.clone(), file.plain.iter().copied());
        let mut names: Vec<String> = Vec::new();
        {
            let mut add = |name: &str| {
                if !names.iter().any(|n| n == name) {
                    names.push(name.to_string());
                }
            };
            for rule in &file.rules {
                add(rule.head());
                match rule {
                    RuleFile::Empty { .. } => {}
                    RuleFile::Linear { next, .. } => add(next),
                    RuleFile::Matching { inner, next, .. } => {
                        add(inner);
                        add(next);
                    }
                }
            }
        }
        let index_of = |name: &str| -> Result<usize> {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::MalformedGrammar(format!("unknown nonterminal {name}")))
        };
        let start = index_of(&file.start)
            .map_err(|_| Error::MalformedGrammar("start nonterminal has no rules".into()))?;
        let mut rules: Vec<Vec<Rule>> = vec![Vec::new(); names.len()];
        for rule in &file.rules {
            let head = index_of(rule.head())?;
            let compiled = match rule {
                RuleFile::Empty { .. } => Rule::Empty,
                RuleFile::Linear { plain, next, .. } => Rule::Linear {
                    plain: *plain,
                    next: index_of(next)?,
                },
                RuleFile::Matching {
                    call, ret, inner, next, ..
                } => {
                    let pair = alphabet
                        .pairs()
                        .iter()
                        .position(|&(a, b)| a == *call && b == *ret)
                        .ok_or_else(|| {
                            Error::MalformedGrammar(format!(
                                "matching rule uses undeclared pair ({call:?},{ret:?})"
                            ))
                        })?;
                    Rule::Matching {
                        pair,
                        inner: index_of(inner)?,
                        next: index_of(next)?,
                    }
                }
            };
            rules[head].push(compiled);
        }
        Vpg::new(alphabet, names, start, rules)
    }

    pub fn load(path: &std::path::Path) -> Result<Vpg> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let file: VpgFile = serde_json::from_str(&text)?;
        Vpg::from_json(&file)
    }
}

/// Serialized grammar file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VpgFile {
    pub pairs: Vec<(char, char)>,
    pub plain: Vec<char>,
    pub start: String,
    pub rules: Vec<RuleFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleFile {
    Empty {
        head: String,
    },
    Linear {
        head: String,
        plain: char,
        next: String,
    },
    Matching {
        head: String,
        call: char,
        ret: char,
        inner: String,
        next: String,
    },
}

impl RuleFile {
    fn head(&self) -> &str {
        match self {
            RuleFile::Empty { head } => head,
            RuleFile::Linear { head, .. } => head,
            RuleFile::Matching { head, .. } => head,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// L -> <a A> L | c B | eps ; A -> <g L h> E ; B -> d L ; E -> eps
    pub fn fig1() -> Vpg {
        let alphabet = TaggedAlphabet::new(vec![('a', 'b'), ('g', 'h')], "cd".chars());
        let names = vec!["L".into(), "A".into(), "B".into(), "E".into()];
        let rules = vec![
            vec![
                Rule::Matching { pair: 0, inner: 1, next: 0 },
                Rule::Linear { plain: 'c', next: 2 },
                Rule::Empty,
            ],
            vec![Rule::Matching { pair: 1, inner: 0, next: 3 }],
            vec![Rule::Linear { plain: 'd', next: 0 }],
            vec![Rule::Empty],
        ];
        Vpg::new(alphabet, names, 0, rules).unwrap()
    }

    fn tag(g: &Vpg, s: &str) -> TaggedString {
        g.alphabet().tag(s).unwrap()
    }

    #[test]
    fn fig1_accepts_seed_string() {
        let g = fig1();
        assert!(g.recognizes(&tag(&g, "agcdcdhbcd")));
    }

    #[test]
    fn fig1_accepts_empty_string() {
        let g = fig1();
        assert!(g.recognizes(&TaggedString::empty()));
    }

    #[test]
    fn fig1_rejects_ad() {
        let g = fig1();
        assert!(!g.recognizes(&tag(&g, "ad")));
    }

    #[test]
    fn fig1_rejects_ab() {
        let g = fig1();
        assert!(!g.recognizes(&tag(&g, "ab")));
    }

    #[test]
    fn sample_of_empty_only_grammar_is_all_empty() {
        let alphabet = TaggedAlphabet::new(vec![], "c".chars());
        let g = Vpg::new(alphabet, vec!["S".into()], 0, vec![vec![Rule::Empty]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = g.sample(5, 8, &mut rng).unwrap();
        assert!(samples.iter().all(|s| s.is_empty()));
    }

    #[test]
    fn dyck1_samples_are_well_matched() {
        let alphabet = TaggedAlphabet::new(vec![('a', 'b')], std::iter::empty());
        let g = Vpg::new(
            alphabet,
            vec!["D".into()],
            0,
            vec![vec![Rule::Matching { pair: 0, inner: 0, next: 0 }, Rule::Empty]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in g.sample(200, 6, &mut rng).unwrap() {
            assert!(s.is_well_matched());
        }
    }

    #[test]
    fn fig1_samples_recognized_by_reference() {
        let g = fig1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in g.sample(100, 10, &mut rng).unwrap() {
            assert!(g.recognizes(&s), "sampled string {s} must be in the language");
        }
    }

    #[test]
    fn unproductive_grammar_errors_on_sample() {
        let alphabet = TaggedAlphabet::new(vec![], "c".chars());
        let g = Vpg::new(
            alphabet,
            vec!["S".into()],
            0,
            vec![vec![Rule::Linear { plain: 'c', next: 0 }]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(g.sample(1, 4, &mut rng), Err(Error::UnproductiveGrammar)));
    }

    #[test]
    fn json_round_trip_preserves_language_shape() {
        let g = fig1();
        let json = serde_json::to_string_pretty(&g.to_json()).unwrap();
        let file: VpgFile = serde_json::from_str(&json).unwrap();
        let back = Vpg::from_json(&file).unwrap();
        assert_eq!(back.to_text(), g.to_text());
        assert!(back.recognizes(&tag(&back, "agcdhbcd")));
    }

    #[test]
    fn text_export_format() {
        let g = fig1();
        let text = g.to_text();
        assert!(text.contains("L -> <a A b> L"));
        assert!(text.contains("L -> c B"));
        assert!(text.contains("L -> eps"));
    }
}
