//! k-module single-entry visibly pushdown automata: deterministic execution,
//! serialization, and conversion to an exportable grammar.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::alphabet::{SymbolKind, TaggedAlphabet, TaggedString};
use crate::error::{Error, Result};
use crate::grammar::{Rule, Vpg};

pub type StateId = usize;

/// Result of running a machine on a tagged string. Ill-formed inputs are
/// distinguished from rejections so conformance testing can skip them
/// cheaply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Accept,
    Reject,
    IllFormed,
}

/// A k-SEVPA. Module 0 holds the initial state and all accepting states;
/// module i+1 is owned by call pair i and entered only at its entry state.
/// The stack alphabet is exactly (caller state, call pair) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sevpa {
    alphabet: TaggedAlphabet,
    /// Global state count per module; global ids are assigned module by
    /// module in order.
    module_sizes: Vec<usize>,
    module_offsets: Vec<usize>,
    entries: Vec<StateId>,
    accepting: BTreeSet<StateId>,
    plain_trans: Vec<BTreeMap<char, StateId>>,
    /// (state in module i >= 1, caller state) -> target in the caller's
    /// module. The return symbol is implied: well-matched inputs can only
    /// close module i with pair i-1's return character.
    ret_trans: BTreeMap<(StateId, StateId), StateId>,
}

impl Sevpa {
    pub fn new(
        alphabet: TaggedAlphabet,
        module_sizes: Vec<usize>,
        entries: Vec<StateId>,
        accepting: BTreeSet<StateId>,
        plain_trans: Vec<BTreeMap<char, StateId>>,
        ret_trans: BTreeMap<(StateId, StateId), StateId>,
    ) -> Result<Self> {
        let mut module_offsets = Vec::with_capacity(module_sizes.len());
        let mut offset = 0;
        for &size in &module_sizes {
            module_offsets.push(offset);
            offset += size;
        }
        let m = Sevpa {
            alphabet,
            module_sizes,
            module_offsets,
            entries,
            accepting,
            plain_trans,
            ret_trans,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let k = self.alphabet.k();
        if self.module_sizes.len() != k + 1 {
            return Err(Error::MalformedMachine(format!(
                "expected {} modules, found {}",
                k + 1,
                self.module_sizes.len()
            )));
        }
        let total = self.state_count();
        if total == 0 || self.module_sizes.iter().any(|&s| s == 0) {
            return Err(Error::MalformedMachine("every module needs a state".into()));
        }
        if self.entries.len() != k + 1 {
            return Err(Error::MalformedMachine("one entry state per module".into()));
        }
        for (i, &e) in self.entries.iter().enumerate() {
            if e >= total || self.module_of(e) != i {
                return Err(Error::MalformedMachine(format!(
                    "entry of module {i} lies outside module {i}"
                )));
            }
        }
        for &q in &self.accepting {
            if q >= total || self.module_of(q) != 0 {
                return Err(Error::MalformedMachine(
                    "accepting states must lie in module 0".into(),
                ));
            }
        }
        if self.plain_trans.len() != total {
            return Err(Error::MalformedMachine(
                "plain transition table must cover every state".into(),
            ));
        }
        for (q, row) in self.plain_trans.iter().enumerate() {
            for c in self.alphabet.plains() {
                match row.get(c) {
                    Some(&t) if self.module_of(t) == self.module_of(q) => {}
                    Some(_) => {
                        return Err(Error::MalformedMachine(
                            "plain transitions may not change module".into(),
                        ))
                    }
                    None => {
                        return Err(Error::MalformedMachine(format!(
                            "missing plain transition from state {q} on {c:?}"
                        )))
                    }
                }
            }
        }
        for module in 1..=k {
            for local in 0..self.module_sizes[module] {
                let q = self.module_offsets[module] + local;
                for caller in 0..total {
                    match self.ret_trans.get(&(q, caller)) {
                        Some(&t) if self.module_of(t) == self.module_of(caller) => {}
                        Some(_) => {
                            return Err(Error::MalformedMachine(
                                "return transitions must target the caller's module".into(),
                            ))
                        }
                        None => {
                            return Err(Error::MalformedMachine(format!(
                                "missing return transition from state {q} with caller {caller}"
                            )))
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

    pub fn k(&self) -> usize {
        self.alphabet.k()
    }

    pub fn state_count(&self) -> usize {
        self.module_sizes.iter().sum()
    }

    pub fn module_sizes(&self) -> &[usize] {
        &self.module_sizes
    }

    pub fn module_of(&self, state: StateId) -> usize {
        let mut module = self.module_sizes.len() - 1;
        while self.module_offsets[module] > state {
            module -= 1;
        }
        module
    }

    pub fn local_index(&self, state: StateId) -> usize {
        state - self.module_offsets[self.module_of(state)]
    }

    pub fn global_id(&self, module: usize, local: usize) -> StateId {
        self.module_offsets[module] + local
    }

    pub fn initial(&self) -> StateId {
        self.entries[0]
    }

    pub fn entry(&self, module: usize) -> StateId {
        self.entries[module]
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn plain_target(&self, state: StateId, c: char) -> Option<StateId> {
        self.plain_trans[state].get(&c).copied()
    }

    pub fn return_target(&self, state: StateId, caller: StateId) -> Option<StateId> {
        self.ret_trans.get(&(state, caller)).copied()
    }

    /// One transition step from a configuration. The caller must have
    /// verified well-matchedness; returns step errors only for symbols
    /// outside the machine alphabet.
    pub fn step(
        &self,
        state: StateId,
        stack: &mut Vec<(StateId, usize)>,
        sym: crate::alphabet::TaggedSymbol,
    ) -> Result<StateId> {
        match sym.kind {
            SymbolKind::Plain => self
                .plain_target(state, sym.ch)
                .ok_or(Error::SymbolOutsideMachine(sym.ch)),
            SymbolKind::Call(p) => {
                if p >= self.k() {
                    return Err(Error::SymbolOutsideMachine(sym.ch));
                }
                stack.push((state, p));
                Ok(self.entry(p + 1))
            }
            SymbolKind::Return(p) => {
                if p >= self.k() {
                    return Err(Error::SymbolOutsideMachine(sym.ch));
                }
                let (caller, pushed) = stack.pop().ok_or_else(|| {
                    Error::Invariant("return on empty stack after well-matched check".into())
                })?;
                debug_assert_eq!(pushed, p);
                self.return_target(state, caller).ok_or_else(|| {
                    Error::Invariant(format!(
                        "missing return transition from {state} with caller {caller}"
                    ))
                })
            }
        }
    }

    /// Runs the machine. Non-well-matched inputs are ill-formed; acceptance
    /// requires ending in an accepting state with an empty stack.
    pub fn run(&self, s: &TaggedString) -> Result<RunOutcome> {
        if !s.is_well_matched() {
            return Ok(RunOutcome::IllFormed);
        }
        let mut state = self.initial();
        let mut stack: Vec<(StateId, usize)> = Vec::new();
        for &sym in s.symbols() {
            state = self.step(state, &mut stack, sym)?;
        }
        debug_assert!(stack.is_empty());
        if self.accepting.contains(&state) {
            Ok(RunOutcome::Accept)
        } else {
            Ok(RunOutcome::Reject)
        }
    }

    /// True iff run accepts; ill-formed counts as rejection.
    pub fn accepts(&self, s: &TaggedString) -> Result<bool> {
        Ok(self.run(s)? == RunOutcome::Accept)
    }

    /// Converts the machine to a grammar with one nonterminal per
    /// same-module state pair (q, q'), generating exactly the well-matched
    /// strings that drive q to q' at equal stack depth. Unreachable and
    /// unproductive nonterminals are pruned.
    pub fn to_vpg(&self) -> Result<Vpg> {
        let modules = self.module_sizes.len();
        // nonterminal ids: start symbol 0, then pair (module, i, j)
        let mut pair_base = vec![0usize; modules];
        let mut next = 1usize;
        for m in 0..modules {
            pair_base[m] = next;
            next += self.module_sizes[m] * self.module_sizes[m];
        }
        let total_nts = next;
        let nt_of = |m: usize, i: usize, j: usize| pair_base[m] + i * self.module_sizes[m] + j;

        let mut rules: Vec<Vec<Rule>> = vec![Vec::new(); total_nts];
        for m in 0..modules {
            let size = self.module_sizes[m];
            for i in 0..size {
                let q = self.global_id(m, i);
                for j in 0..size {
                    let head = nt_of(m, i, j);
                    if i == j {
                        rules[head].push(Rule::Empty);
                    }
                    for &c in self.alphabet.plains() {
                        let t = self.plain_target(q, c).expect("total over plains");
                        rules[head].push(Rule::Linear {
                            plain: c,
                            next: nt_of(m, self.local_index(t), j),
                        });
                    }
                    for p in 0..self.k() {
                        let callee = p + 1;
                        let entry_local = self.local_index(self.entry(callee));
                        for q2_local in 0..self.module_sizes[callee] {
                            let q2 = self.global_id(callee, q2_local);
                            let q3 = self
                                .return_target(q2, q)
                                .expect("total over reachable stack symbols");
                            rules[head].push(Rule::Matching {
                                pair: p,
                                inner: nt_of(callee, entry_local, q2_local),
                                next: nt_of(m, self.local_index(q3), j),
                            });
                        }
                    }
                }
            }
        }
        // start generates the union over accepting states
        let init_local = self.local_index(self.initial());
        for &qf in &self.accepting {
            let src = nt_of(0, init_local, self.local_index(qf));
            let copied = rules[src].clone();
            rules[0].extend(copied);
        }

        // keep only productive nonterminals, then only ones reachable from S
        let mut productive = vec![false; total_nts];
        loop {
            let mut changed = false;
            for nt in 0..total_nts {
                if productive[nt] {
                    continue;
                }
                let ok = rules[nt].iter().any(|r| match *r {
                    Rule::Empty => true,
                    Rule::Linear { next, .. } => productive[next],
                    Rule::Matching { inner, next, .. } => productive[inner] && productive[next],
                });
                if ok {
                    productive[nt] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for nt in 0..total_nts {
            rules[nt].retain(|r| match *r {
                Rule::Empty => true,
                Rule::Linear { next, .. } => productive[next],
                Rule::Matching { inner, next, .. } => productive[inner] && productive[next],
            });
        }
        let mut reachable = vec![false; total_nts];
        let mut work = vec![0usize];
        reachable[0] = true;
        while let Some(nt) = work.pop() {
            for r in &rules[nt] {
                match *r {
                    Rule::Empty => {}
                    Rule::Linear { next, .. } => {
                        if !reachable[next] {
                            reachable[next] = true;
                            work.push(next);
                        }
                    }
                    Rule::Matching { inner, next, .. } => {
                        for t in [inner, next] {
                            if !reachable[t] {
                                reachable[t] = true;
                                work.push(t);
                            }
                        }
                    }
                }
            }
        }

        let mut keep: Vec<usize> = (0..total_nts)
            .filter(|&nt| reachable[nt] && (nt == 0 || productive[nt]))
            .collect();
        if !keep.contains(&0) {
            keep.insert(0, 0);
        }
        let mut remap = vec![usize::MAX; total_nts];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let mut names = Vec::with_capacity(keep.len());
        let mut kept_rules = Vec::with_capacity(keep.len());
        for &old in &keep {
            names.push(if old == 0 {
                "S".to_string()
            } else {
                let m = (0..modules)
                    .rfind(|&m| pair_base[m] <= old)
                    .expect("nonterminal belongs to a module");
                let rel = old - pair_base[m];
                let size = self.module_sizes[m];
                format!("N{}_{}_{}", m, rel / size, rel % size)
            });
            kept_rules.push(
                rules[old]
                    .iter()
                    .map(|r| match *r {
                        Rule::Empty => Rule::Empty,
                        Rule::Linear { plain, next } => Rule::Linear {
                            plain,
                            next: remap[next],
                        },
                        Rule::Matching { pair, inner, next } => Rule::Matching {
                            pair,
                            inner: remap[inner],
                            next: remap[next],
                        },
                    })
                    .collect(),
            );
        }
        Vpg::new(self.alphabet.clone(), names, 0, kept_rules)
    }

    pub fn to_json(&self) -> SevpaFile {
        let mut modules = Vec::new();
        for m in 0..self.module_sizes.len() {
            modules.push(ModuleFile {
                states: self.module_sizes[m],
                entry: self.local_index(self.entries[m]),
                accepting: if m == 0 {
                    Some(
                        self.accepting
                            .iter()
                            .map(|&q| self.local_index(q))
                            .collect(),
                    )
                } else {
                    None
                },
            });
        }
        let mut plain_trans = Vec::new();
        for (q, row) in self.plain_trans.iter().enumerate() {
            for (&c, &t) in row {
                plain_trans.push(PlainTransFile {
                    from: self.addr(q),
                    ch: c,
                    to: self.addr(t),
                });
            }
        }
        let mut ret_trans = Vec::new();
        for (&(q, caller), &t) in &self.ret_trans {
            ret_trans.push(RetTransFile {
                state: self.addr(q),
                caller: self.addr(caller),
                to: self.addr(t),
            });
        }
        SevpaFile {
            k: self.k(),
            pairs: self.alphabet.pairs().to_vec(),
            plain: self.alphabet.plains().to_vec(),
            modules,
            plain_trans,
            ret_trans,
        }
    }

    fn addr(&self, state: StateId) -> (usize, usize) {
        (self.module_of(state), self.local_index(state))
    }

    pub fn from_json(file: &SevpaFile) -> Result<Sevpa> {
        let alphabet = TaggedAlphabet::new(file.pairs.clone(), file.plain.iter().copied());
        if file.modules.len() != file.k + 1 {
            return Err(Error::MalformedMachine("module count must be k+1".into()));
        }
        let module_sizes: Vec<usize> = file.modules.iter().map(|m| m.states).collect();
        let mut module_offsets = Vec::with_capacity(module_sizes.len());
        let mut offset = 0;
        for &s in &module_sizes {
            module_offsets.push(offset);
            offset += s;
        }
        let total: usize = module_sizes.iter().sum();
        let resolve = |(m, i): (usize, usize)| -> Result<StateId> {
            if m >= module_sizes.len() || i >= module_sizes[m] {
                return Err(Error::MalformedMachine(format!(
                    "state address ({m},{i}) out of range"
                )));
            }
            Ok(module_offsets[m] + i)
        };
        let entries: Vec<StateId> = file
            .modules
            .iter()
            .enumerate()
            .map(|(m, mf)| resolve((m, mf.entry)))
            .collect::<Result<_>>()?;
        let mut accepting = BTreeSet::new();
        if let Some(acc) = &file.modules[0].accepting {
            for &i in acc {
                accepting.insert(resolve((0, i))?);
            }
        }
        let mut plain_trans = vec![BTreeMap::new(); total];
        for t in &file.plain_trans {
            let from = resolve(t.from)?;
            plain_trans[from].insert(t.ch, resolve(t.to)?);
        }
        let mut ret_trans = BTreeMap::new();
        for t in &file.ret_trans {
            ret_trans.insert((resolve(t.state)?, resolve(t.caller)?), resolve(t.to)?);
        }
        Sevpa::new(
            alphabet,
            module_sizes,
            entries,
            accepting,
            plain_trans,
            ret_trans,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SevpaFile {
    pub k: usize,
    pub pairs: Vec<(char, char)>,
    pub plain: Vec<char>,
    pub modules: Vec<ModuleFile>,
    pub plain_trans: Vec<PlainTransFile>,
    pub ret_trans: Vec<RetTransFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleFile {
    pub states: usize,
    pub entry: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accepting: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlainTransFile {
    pub from: (usize, usize),
    pub ch: char,
    pub to: (usize, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetTransFile {
    pub state: (usize, usize),
    pub caller: (usize, usize),
    pub to: (usize, usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Machine accepting every well-matched string over one pair (Dyck-1).
    pub fn dyck1_machine() -> Sevpa {
        let alphabet = TaggedAlphabet::new(vec![('a', 'b')], std::iter::empty());
        // module 0: {0}, module 1: {1}
        let mut ret = BTreeMap::new();
        ret.insert((1, 0), 0);
        ret.insert((1, 1), 1);
        Sevpa::new(
            alphabet,
            vec![1, 1],
            vec![0, 1],
            BTreeSet::from([0]),
            vec![BTreeMap::new(), BTreeMap::new()],
            ret,
        )
        .unwrap()
    }

    /// Single-state machine over plain {c} accepting everything.
    fn sigma_star_machine() -> Sevpa {
        let alphabet = TaggedAlphabet::new(vec![], "c".chars());
        Sevpa::new(
            alphabet,
            vec![1],
            vec![0],
            BTreeSet::from([0]),
            vec![BTreeMap::from([('c', 0)])],
            BTreeMap::new(),
        )
        .unwrap()
    }

    fn tag(m: &Sevpa, s: &str) -> TaggedString {
        m.alphabet().tag(s).unwrap()
    }

    #[test]
    fn dyck1_accepts_empty() {
        let m = dyck1_machine();
        assert_eq!(m.run(&TaggedString::empty()).unwrap(), RunOutcome::Accept);
    }

    #[test]
    fn dyck1_accepts_nested() {
        let m = dyck1_machine();
        assert_eq!(m.run(&tag(&m, "aabbab")).unwrap(), RunOutcome::Accept);
    }

    #[test]
    fn non_well_matched_is_ill_formed() {
        let m = dyck1_machine();
        assert_eq!(m.run(&tag(&m, "ab" )).unwrap(), RunOutcome::Accept);
        assert_eq!(m.run(&tag(&m, "a")).unwrap(), RunOutcome::IllFormed);
        assert_eq!(m.run(&tag(&m, "ba")).unwrap(), RunOutcome::IllFormed);
    }

    #[test]
    fn symbol_outside_alphabet_is_domain_error() {
        let m = sigma_star_machine();
        let mut s = TaggedString::empty();
        s.push(crate::alphabet::TaggedSymbol {
            ch: 'z',
            kind: SymbolKind::Plain,
        });
        assert!(matches!(m.run(&s), Err(Error::SymbolOutsideMachine('z'))));
    }

    #[test]
    fn sigma_star_machine_to_vpg_is_s_to_eps_and_cs() {
        let g = sigma_star_machine().to_vpg().unwrap();
        let text = g.to_text();
        assert!(text.contains("S -> eps"));
        assert!(text.contains("S -> c S") || text.contains("S -> c N0_0_0"));
        // language check on short strings
        for s in ["", "c", "cc", "ccc"] {
            assert!(g.recognizes(&g.alphabet().tag(s).unwrap()), "{s:?}");
        }
    }

    #[test]
    fn dyck1_machine_to_vpg_language_equal_to_depth_10() {
        let m = dyck1_machine();
        let g = m.to_vpg().unwrap();
        // every well-matched string over one pair should be in both
        fn gen(depth: usize, len: usize, out: &mut Vec<String>, cur: &mut String) {
            if cur.len() <= len {
                out.push(cur.clone());
            }
            if cur.len() + 2 > len {
                return;
            }
            cur.push('a');
            gen(depth + 1, len, out, cur);
            cur.pop();
            if depth > 0 {
                cur.push('b');
                gen(depth - 1, len, out, cur);
                cur.pop();
            }
        }
        let mut candidates = Vec::new();
        gen(0, 10, &mut candidates, &mut String::new());
        assert!(candidates.len() > 100);
        for raw in candidates {
            let tagged = m.alphabet().tag(&raw).unwrap();
            let by_machine = m.run(&tagged).unwrap() == RunOutcome::Accept;
            let by_grammar = g.recognizes(&tagged);
            assert_eq!(by_machine, by_grammar, "{raw:?}");
        }
    }

    #[test]
    fn machine_json_round_trip() {
        let m = dyck1_machine();
        let json = serde_json::to_string(&m.to_json()).unwrap();
        let file: SevpaFile = serde_json::from_str(&json).unwrap();
        let back = Sevpa::from_json(&file).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn totality_is_validated() {
        let alphabet = TaggedAlphabet::new(vec![], "c".chars());
        let err = Sevpa::new(
            alphabet,
            vec![1],
            vec![0],
            BTreeSet::new(),
            vec![BTreeMap::new()],
            BTreeMap::new(),
        );
        assert!(matches!(err, Err(Error::MalformedMachine(_))));
    }
}
