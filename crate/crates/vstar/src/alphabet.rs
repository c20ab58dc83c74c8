//! Character and tag domain model: alphabets, call/return taggings, tagged
//! strings, well-matchedness and nesting-depth arithmetic.
//!
//! Bracket kinds are identified by pair index rather than by raw character,
//! so character-level taggings and artificial token brackets share one
//! well-matchedness implementation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of characters; iteration order is sorted by code point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    chars: BTreeSet<char>,
}

impl Alphabet {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Self> {
        let chars: BTreeSet<char> = chars.into_iter().collect();
        if chars.is_empty() {
            return Err(Error::InvalidTagging("alphabet must be non-empty".into()));
        }
        Ok(Alphabet { chars })
    }

    /// Alphabet of all characters occurring in the given strings.
    pub fn from_strings<S: AsRef<str>>(strings: &[S]) -> Result<Self> {
        Alphabet::new(strings.iter().flat_map(|s| s.as_ref().chars()))
    }

    pub fn contains(&self, c: char) -> bool {
        self.chars.contains(&c)
    }

    pub fn iter(&self) -> impl Iterator<Item = char> + '_ {
        self.chars.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }
}

/// A set of (call, return) character pairs defining a tagging function.
///
/// Unique Pairing is enforced at construction: no character may appear in two
/// pairs or on both sides of pairs. Characters not mentioned are plain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TaggingRepr", into = "TaggingRepr")]
pub struct Tagging {
    pairs: Vec<(char, char)>,
}

#[derive(Serialize, Deserialize)]
struct TaggingRepr {
    pairs: Vec<(char, char)>,
}

impl TryFrom<TaggingRepr> for Tagging {
    type Error = Error;
    fn try_from(repr: TaggingRepr) -> Result<Self> {
        Tagging::new(repr.pairs)
    }
}

impl From<Tagging> for TaggingRepr {
    fn from(t: Tagging) -> Self {
        TaggingRepr { pairs: t.pairs }
    }
}

impl Tagging {
    /// Builds a tagging, rejecting any violation of Unique Pairing.
    /// Pairs are kept in sorted order by call character.
    pub fn new(pairs: impl IntoIterator<Item = (char, char)>) -> Result<Self> {
        let mut pairs: Vec<(char, char)> = pairs.into_iter().collect();
        pairs.sort();
        pairs.dedup();
        let mut seen = BTreeSet::new();
        for &(a, b) in &pairs {
            if a == b {
                return Err(Error::InvalidTagging(format!(
                    "character {a:?} cannot be both call and return"
                )));
            }
            if !seen.insert(a) {
                return Err(Error::InvalidTagging(format!(
                    "character {a:?} appears in more than one pair"
                )));
            }
            if !seen.insert(b) {
                return Err(Error::InvalidTagging(format!(
                    "character {b:?} appears in more than one pair"
                )));
            }
        }
        Ok(Tagging { pairs })
    }

    pub fn empty() -> Self {
        Tagging { pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[(char, char)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn call_char(&self, pair: usize) -> char {
        self.pairs[pair].0
    }

    pub fn return_char(&self, pair: usize) -> char {
        self.pairs[pair].1
    }

    /// Returns the kind assigned to a character by this tagging.
    pub fn kind_of(&self, c: char) -> SymbolKind {
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            if c == a {
                return SymbolKind::Call(i);
            }
            if c == b {
                return SymbolKind::Return(i);
            }
        }
        SymbolKind::Plain
    }

    /// Checks every tagged character belongs to the alphabet.
    pub fn validate_against(&self, alphabet: &Alphabet) -> Result<()> {
        for &(a, b) in &self.pairs {
            for c in [a, b] {
                if !alphabet.contains(c) {
                    return Err(Error::CharOutsideAlphabet(c));
                }
            }
        }
        Ok(())
    }

    /// Maps each character of `s` to a call, return, or plain symbol.
    /// Every character of `s` must belong to `alphabet`.
    pub fn apply(&self, alphabet: &Alphabet, s: &str) -> Result<TaggedString> {
        let mut symbols = Vec::with_capacity(s.chars().count());
        for c in s.chars() {
            if !alphabet.contains(c) {
                return Err(Error::CharOutsideAlphabet(c));
            }
            symbols.push(TaggedSymbol {
                ch: c,
                kind: self.kind_of(c),
            });
        }
        Ok(TaggedString { symbols })
    }

    /// Like [`Tagging::apply`] without an alphabet check; used where the
    /// caller already knows the domain (e.g. fragments of validated seeds).
    pub fn apply_unchecked(&self, s: &str) -> TaggedString {
        TaggedString {
            symbols: s
                .chars()
                .map(|c| TaggedSymbol {
                    ch: c,
                    kind: self.kind_of(c),
                })
                .collect(),
        }
    }
}

/// Role of one symbol in a tagged string. The index identifies which
/// call/return pair the bracket belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    Plain,
    Call(usize),
    Return(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaggedSymbol {
    pub ch: char,
    pub kind: SymbolKind,
}

/// A string whose characters carry call/return/plain kinds. Stripping the
/// kinds recovers the source string exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaggedString {
    symbols: Vec<TaggedSymbol>,
}

/// Unmatched call and return pair indices of a tagged string, in order of
/// occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnmatchedProfile {
    pub pending_calls: Vec<usize>,
    pub pending_returns: Vec<usize>,
}

impl UnmatchedProfile {
    pub fn is_empty(&self) -> bool {
        self.pending_calls.is_empty() && self.pending_returns.is_empty()
    }
}

impl TaggedString {
    pub fn new(symbols: Vec<TaggedSymbol>) -> Self {
        TaggedString { symbols }
    }

    pub fn empty() -> Self {
        TaggedString::default()
    }

    pub fn symbols(&self) -> &[TaggedSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The source string with all kinds stripped.
    pub fn untag(&self) -> String {
        self.symbols.iter().map(|s| s.ch).collect()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> TaggedString {
        TaggedString {
            symbols: self.symbols[range].to_vec(),
        }
    }

    pub fn push(&mut self, sym: TaggedSymbol) {
        self.symbols.push(sym);
    }

    pub fn append(&mut self, other: &TaggedString) {
        self.symbols.extend_from_slice(&other.symbols);
    }

    pub fn concat(parts: &[&TaggedString]) -> TaggedString {
        let mut symbols = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            symbols.extend_from_slice(&p.symbols);
        }
        TaggedString { symbols }
    }

    /// True iff scanning left to right, every return closes the innermost
    /// pending call of the same pair and no calls or returns remain pending.
    pub fn is_well_matched(&self) -> bool {
        let mut stack: Vec<usize> = Vec::new();
        for sym in &self.symbols {
            match sym.kind {
                SymbolKind::Plain => {}
                SymbolKind::Call(i) => stack.push(i),
                SymbolKind::Return(i) => {
                    if stack.pop() != Some(i) {
                        return false;
                    }
                }
            }
        }
        stack.is_empty()
    }

    /// Unmatched call and return occurrences. A return that does not close
    /// the innermost pending call of its own pair counts as unmatched and
    /// leaves the pending calls untouched.
    pub fn unmatched_profile(&self) -> UnmatchedProfile {
        let mut pending_calls: Vec<usize> = Vec::new();
        let mut pending_returns: Vec<usize> = Vec::new();
        for sym in &self.symbols {
            match sym.kind {
                SymbolKind::Plain => {}
                SymbolKind::Call(i) => pending_calls.push(i),
                SymbolKind::Return(i) => {
                    if pending_calls.last() == Some(&i) {
                        pending_calls.pop();
                    } else {
                        pending_returns.push(i);
                    }
                }
            }
        }
        UnmatchedProfile {
            pending_calls,
            pending_returns,
        }
    }

    /// Stack height delta profile: (calls seen - returns seen) after the
    /// whole string, for stack-discipline checks.
    pub fn net_depth(&self) -> isize {
        self.symbols.iter().fold(0isize, |d, s| match s.kind {
            SymbolKind::Call(_) => d + 1,
            SymbolKind::Return(_) => d - 1,
            SymbolKind::Plain => d,
        })
    }
}

impl fmt::Display for TaggedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sym in &self.symbols {
            match sym.kind {
                SymbolKind::Plain => write!(f, "{}", sym.ch)?,
                SymbolKind::Call(_) => write!(f, "<{}", sym.ch)?,
                SymbolKind::Return(_) => write!(f, "{}>", sym.ch)?,
            }
        }
        Ok(())
    }
}

/// The working alphabet of a learner or machine: k call/return pairs plus the
/// plain characters, with pair index i owning module i+1 of a k-SEVPA.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedAlphabet {
    pairs: Vec<(char, char)>,
    plains: Vec<char>,
}

impl TaggedAlphabet {
    pub fn new(pairs: Vec<(char, char)>, plains: impl IntoIterator<Item = char>) -> Self {
        let mut plains: Vec<char> = plains.into_iter().collect();
        plains.sort_unstable();
        plains.dedup();
        plains.retain(|c| !pairs.iter().any(|&(a, b)| a == *c || b == *c));
        TaggedAlphabet { pairs, plains }
    }

    /// Splits an alphabet into tagged pairs and plain characters.
    pub fn from_tagging(alphabet: &Alphabet, tagging: &Tagging) -> TaggedAlphabet {
        TaggedAlphabet::new(tagging.pairs().to_vec(), alphabet.iter())
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(char, char)] {
        &self.pairs
    }

    pub fn plains(&self) -> &[char] {
        &self.plains
    }

    pub fn call_char(&self, pair: usize) -> char {
        self.pairs[pair].0
    }

    pub fn return_char(&self, pair: usize) -> char {
        self.pairs[pair].1
    }

    pub fn call_symbol(&self, pair: usize) -> TaggedSymbol {
        TaggedSymbol {
            ch: self.pairs[pair].0,
            kind: SymbolKind::Call(pair),
        }
    }

    pub fn return_symbol(&self, pair: usize) -> TaggedSymbol {
        TaggedSymbol {
            ch: self.pairs[pair].1,
            kind: SymbolKind::Return(pair),
        }
    }

    pub fn plain_symbol(&self, c: char) -> TaggedSymbol {
        TaggedSymbol {
            ch: c,
            kind: SymbolKind::Plain,
        }
    }

    pub fn contains(&self, c: char) -> bool {
        self.plains.binary_search(&c).is_ok()
            || self.pairs.iter().any(|&(a, b)| a == c || b == c)
    }

    pub fn kind_of(&self, c: char) -> Option<SymbolKind> {
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            if c == a {
                return Some(SymbolKind::Call(i));
            }
            if c == b {
                return Some(SymbolKind::Return(i));
            }
        }
        if self.plains.binary_search(&c).is_ok() {
            Some(SymbolKind::Plain)
        } else {
            None
        }
    }

    /// Tags a raw string over this alphabet.
    pub fn tag(&self, s: &str) -> Result<TaggedString> {
        let mut symbols = Vec::new();
        for c in s.chars() {
            match self.kind_of(c) {
                Some(kind) => symbols.push(TaggedSymbol { ch: c, kind }),
                None => return Err(Error::CharOutsideAlphabet(c)),
            }
        }
        Ok(TaggedString::new(symbols))
    }
}

/// Preferred glyphs for generated bracket symbols, in order. Falls back to
/// the private use area once exhausted or on collision with the base
/// alphabet.
const BRACKET_GLYPHS: &[(char, char)] = &[
    ('\u{25C1}', '\u{25B7}'), // white left/right pointing triangles
    ('\u{27E6}', '\u{27E7}'),
    ('\u{27EA}', '\u{27EB}'),
    ('\u{2308}', '\u{2309}'),
    ('\u{230A}', '\u{230B}'),
];

/// Generates `n` artificial bracket pairs disjoint from `base`.
pub fn artificial_brackets(base: &Alphabet, n: usize) -> Vec<(char, char)> {
    let mut out = Vec::with_capacity(n);
    let mut used: BTreeSet<char> = base.iter().collect();
    let mut glyphs = BRACKET_GLYPHS.iter();
    let mut pua = 0xE000u32;
    while out.len() < n {
        let candidate = glyphs.next().copied().unwrap_or_else(|| {
            let c = (
                char::from_u32(pua).unwrap(),
                char::from_u32(pua + 1).unwrap(),
            );
            pua += 2;
            c
        });
        if used.contains(&candidate.0) || used.contains(&candidate.1) {
            continue;
        }
        used.insert(candidate.0);
        used.insert(candidate.1);
        out.push(candidate);
    }
    out
}
