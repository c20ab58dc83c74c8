//! Angluin-style exact learning of regular languages from membership queries,
//! with simulated or exhaustive equivalence checking. Used standalone and for
//! token lexical rules.

use std::collections::{BTreeSet, HashMap};

use crate::dfa::Dfa;
use crate::error::Result;

/// Equivalence checking for a hypothesis DFA.
pub enum DfaTeacher<'a> {
    /// Compare against membership on a fixed, finite list of test strings.
    Tests(&'a [String]),
    /// Compare against membership on every string up to the given length;
    /// a perfect teacher for languages distinguished within the bound.
    Exhaustive { max_len: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct LstarBudget {
    pub max_membership_queries: u64,
}

impl Default for LstarBudget {
    fn default() -> Self {
        LstarBudget {
            max_membership_queries: 200_000,
        }
    }
}

#[derive(Debug)]
pub struct LstarOutcome {
    pub dfa: Dfa,
    pub converged: bool,
    pub membership_calls: u64,
}

struct Table<'a> {
    member: &'a mut dyn FnMut(&str) -> Result<bool>,
    memo: HashMap<String, bool>,
    calls: u64,
    budget: u64,
    exhausted: bool,
}

impl<'a> Table<'a> {
    fn ask(&mut self, s: &str) -> Result<bool> {
        if let Some(&v) = self.memo.get(s) {
            return Ok(v);
        }
        if self.calls >= self.budget {
            self.exhausted = true;
            // conservative answer once over budget; the run is flagged
            return Ok(false);
        }
        self.calls += 1;
        let v = (self.member)(s)?;
        self.memo.insert(s.to_string(), v);
        Ok(v)
    }

    fn row(&mut self, prefix: &str, suffixes: &[String]) -> Result<Vec<bool>> {
        suffixes
            .iter()
            .map(|e| {
                let mut w = String::with_capacity(prefix.len() + e.len());
                w.push_str(prefix);
                w.push_str(e);
                self.ask(&w)
            })
            .collect()
    }
}

/// Learns a DFA for the language defined by `member` over `alphabet`.
///
/// Classic observation-table loop: keep (Q, T) closed and consistent, build
/// the hypothesis with one state per distinct row, consult the teacher, and
/// fold every prefix of a counterexample back into the table. Returns a
/// non-converged flag instead of failing when the query budget runs out.
pub fn lstar_learn(
    member: &mut dyn FnMut(&str) -> Result<bool>,
    alphabet: &[char],
    teacher: DfaTeacher,
    budget: LstarBudget,
) -> Result<LstarOutcome> {
    assert!(!alphabet.is_empty(), "alphabet must be non-empty");
    let mut table = Table {
        member,
        memo: HashMap::new(),
        calls: 0,
        budget: budget.max_membership_queries,
        exhausted: false,
    };
    let mut prefixes: Vec<String> = vec![String::new()];
    let mut suffixes: Vec<String> = vec![String::new()];

    loop {
        // make the table closed and consistent
        loop {
            if table.exhausted {
                break;
            }
            if let Some(new_prefix) = find_unclosed(&mut table, &prefixes, &suffixes, alphabet)? {
                prefixes.push(new_prefix);
                continue;
            }
            if let Some(new_suffix) = find_inconsistency(&mut table, &prefixes, &suffixes, alphabet)?
            {
                suffixes.push(new_suffix);
                continue;
            }
            break;
        }
        let dfa = build_hypothesis(&mut table, &prefixes, &suffixes, alphabet)?;
        if table.exhausted {
            return Ok(LstarOutcome {
                dfa,
                converged: false,
                membership_calls: table.calls,
            });
        }
        let ce = match &teacher {
            DfaTeacher::Tests(tests) => {
                let mut found = None;
                for t in tests.iter() {
                    if table.ask(t)? != dfa.accepts(t) {
                        found = Some(t.clone());
                        break;
                    }
                }
                found
            }
            DfaTeacher::Exhaustive { max_len } => {
                exhaustive_counterexample(&mut table, &dfa, alphabet, *max_len)?
            }
        };
        match ce {
            None => {
                return Ok(LstarOutcome {
                    dfa,
                    converged: !table.exhausted,
                    membership_calls: table.calls,
                })
            }
            Some(ce) => {
                let chars: Vec<char> = ce.chars().collect();
                for end in 0..=chars.len() {
                    let prefix: String = chars[..end].iter().collect();
                    if !prefixes.contains(&prefix) {
                        prefixes.push(prefix);
                    }
                }
            }
        }
    }
}

fn find_unclosed(
    table: &mut Table,
    prefixes: &[String],
    suffixes: &[String],
    alphabet: &[char],
) -> Result<Option<String>> {
    let mut rows = BTreeSet::new();
    for p in prefixes {
        rows.insert(table.row(p, suffixes)?);
    }
    for p in prefixes {
        for &c in alphabet {
            let mut pc = p.clone();
            pc.push(c);
            if !rows.contains(&table.row(&pc, suffixes)?) {
                return Ok(Some(pc));
            }
        }
    }
    Ok(None)
}

fn find_inconsistency(
    table: &mut Table,
    prefixes: &[String],
    suffixes: &[String],
    alphabet: &[char],
) -> Result<Option<String>> {
    for i in 0..prefixes.len() {
        for j in (i + 1)..prefixes.len() {
            if table.row(&prefixes[i], suffixes)? != table.row(&prefixes[j], suffixes)? {
                continue;
            }
            for &c in alphabet {
                let mut pi = prefixes[i].clone();
                pi.push(c);
                let mut pj = prefixes[j].clone();
                pj.push(c);
                let ri = table.row(&pi, suffixes)?;
                let rj = table.row(&pj, suffixes)?;
                if ri != rj {
                    let idx = ri.iter().zip(&rj).position(|(a, b)| a != b).unwrap();
                    let mut new_suffix = String::new();
                    new_suffix.push(c);
                    new_suffix.push_str(&suffixes[idx]);
                    return Ok(Some(new_suffix));
                }
            }
        }
    }
    Ok(None)
}

fn build_hypothesis(
    table: &mut Table,
    prefixes: &[String],
    suffixes: &[String],
    alphabet: &[char],
) -> Result<Dfa> {
    let mut row_to_state: Vec<(Vec<bool>, usize)> = Vec::new();
    let mut state_rep: Vec<String> = Vec::new();
    for p in prefixes {
        let row = table.row(p, suffixes)?;
        if !row_to_state.iter().any(|(r, _)| *r == row) {
            row_to_state.push((row, state_rep.len()));
            state_rep.push(p.clone());
        }
    }
    let state_of = |row: &Vec<bool>, map: &Vec<(Vec<bool>, usize)>| -> Option<usize> {
        map.iter().find(|(r, _)| r == row).map(|&(_, s)| s)
    };
    let n = state_rep.len();
    let mut trans = vec![vec![0usize; alphabet.len()]; n];
    for (s, rep) in state_rep.iter().enumerate() {
        for (ci, &c) in alphabet.iter().enumerate() {
            let mut rc = rep.clone();
            rc.push(c);
            let row = table.row(&rc, suffixes)?;
            // closedness guarantees the row exists; when over budget the
            // table may be ragged, fall back to the current state
            trans[s][ci] = state_of(&row, &row_to_state).unwrap_or(s);
        }
    }
    let mut accepting = BTreeSet::new();
    let eps_idx = suffixes.iter().position(|e| e.is_empty()).expect("ε in T");
    for (row, state) in &row_to_state {
        if row[eps_idx] {
            accepting.insert(*state);
        }
    }
    let initial_row = table.row("", suffixes)?;
    let initial = state_of(&initial_row, &row_to_state).expect("ε row present");
    Dfa::new(alphabet.to_vec(), initial, accepting, trans)
}

fn exhaustive_counterexample(
    table: &mut Table,
    dfa: &Dfa,
    alphabet: &[char],
    max_len: usize,
) -> Result<Option<String>> {
    let mut current = vec![String::new()];
    for _ in 0..=max_len {
        for s in &current {
            if table.exhausted {
                return Ok(None);
            }
            if table.ask(s)? != dfa.accepts(s) {
                return Ok(Some(s.clone()));
            }
        }
        let mut next = Vec::with_capacity(current.len() * alphabet.len());
        for s in &current {
            for &c in alphabet {
                let mut sc = s.clone();
                sc.push(c);
                next.push(sc);
            }
        }
        current = next;
    }
    Ok(None)
}
