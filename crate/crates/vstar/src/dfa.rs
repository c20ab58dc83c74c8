//! Deterministic finite automata over an explicit character set, used for
//! token lexical rules.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A total DFA over its declared character set. Characters outside the set
/// reject.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    alphabet: Vec<char>,
    initial: usize,
    accepting: BTreeSet<usize>,
    /// trans[state][char index] -> state
    trans: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn new(
        alphabet: Vec<char>,
        initial: usize,
        accepting: BTreeSet<usize>,
        trans: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let states = trans.len();
        if states == 0 || initial >= states {
            return Err(Error::Invariant("dfa needs states and a valid initial".into()));
        }
        for row in &trans {
            if row.len() != alphabet.len() || row.iter().any(|&t| t >= states) {
                return Err(Error::Invariant("dfa transition table must be total".into()));
            }
        }
        if accepting.iter().any(|&q| q >= states) {
            return Err(Error::Invariant("dfa accepting state out of range".into()));
        }
        Ok(Dfa {
            alphabet,
            initial,
            accepting,
            trans,
        })
    }

    /// Single-string language.
    pub fn literal(word: &str, alphabet: &[char]) -> Dfa {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let sink = n + 1;
        let mut trans = vec![vec![sink; alphabet.len()]; n + 2];
        for (i, &c) in chars.iter().enumerate() {
            let idx = alphabet.iter().position(|&a| a == c).expect("char in alphabet");
            trans[i][idx] = i + 1;
        }
        Dfa {
            alphabet: alphabet.to_vec(),
            initial: 0,
            accepting: BTreeSet::from([n]),
            trans,
        }
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.trans.len()
    }

    pub fn accepts(&self, s: &str) -> bool {
        let mut state = self.initial;
        for c in s.chars() {
            match self.alphabet.iter().position(|&a| a == c) {
                Some(idx) => state = self.trans[state][idx],
                None => return false,
            }
        }
        self.accepting.contains(&state)
    }

    /// Longest non-empty prefix of `chars[start..]` accepted by this DFA;
    /// returns the exclusive end index.
    pub fn longest_match(&self, chars: &[char], start: usize) -> Option<usize> {
        let mut state = self.initial;
        let mut best = None;
        for (offset, &c) in chars[start..].iter().enumerate() {
            match self.alphabet.iter().position(|&a| a == c) {
                Some(idx) => state = self.trans[state][idx],
                None => break,
            }
            if self.accepting.contains(&state) {
                best = Some(start + offset + 1);
            }
        }
        best
    }

    /// True iff no string is accepted.
    pub fn language_is_empty(&self) -> bool {
        let mut seen = vec![false; self.trans.len()];
        let mut work = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = work.pop() {
            if self.accepting.contains(&q) {
                return false;
            }
            for &t in &self.trans[q] {
                if !seen[t] {
                    seen[t] = true;
                    work.push(t);
                }
            }
        }
        true
    }

    /// True iff some string is accepted by both automata. Characters present
    /// in only one alphabet cannot appear in a shared string.
    pub fn intersects(&self, other: &Dfa) -> bool {
        let shared: Vec<char> = self
            .alphabet
            .iter()
            .copied()
            .filter(|c| other.alphabet.contains(c))
            .collect();
        let mut seen = BTreeSet::new();
        let mut work = vec![(self.initial, other.initial)];
        seen.insert((self.initial, other.initial));
        while let Some((a, b)) = work.pop() {
            if self.accepting.contains(&a) && other.accepting.contains(&b) {
                return true;
            }
            for &c in &shared {
                let ia = self.alphabet.iter().position(|&x| x == c).unwrap();
                let ib = other.alphabet.iter().position(|&x| x == c).unwrap();
                let next = (self.trans[a][ia], other.trans[b][ib]);
                if seen.insert(next) {
                    work.push(next);
                }
            }
        }
        false
    }

    /// Shortest accepted string, if any.
    pub fn shortest_word(&self) -> Option<String> {
        use std::collections::VecDeque;
        let mut back: Vec<Option<(usize, char)>> = vec![None; self.trans.len()];
        let mut seen = vec![false; self.trans.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        let mut hit = if self.accepting.contains(&self.initial) {
            Some(self.initial)
        } else {
            None
        };
        while hit.is_none() {
            let q = queue.pop_front()?;
            for (idx, &t) in self.trans[q].iter().enumerate() {
                if !seen[t] {
                    seen[t] = true;
                    back[t] = Some((q, self.alphabet[idx]));
                    if self.accepting.contains(&t) {
                        hit = Some(t);
                        break;
                    }
                    queue.push_back(t);
                }
            }
        }
        let mut out = Vec::new();
        let mut q = hit?;
        while let Some((prev, c)) = back[q] {
            out.push(c);
            q = prev;
        }
        out.reverse();
        Some(out.into_iter().collect())
    }
}
