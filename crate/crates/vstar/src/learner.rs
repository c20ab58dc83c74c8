//! Table-based active learning of k-SEVPAs: per-module access and test word
//! sets, the closing worklist, hypothesis construction, binary-search
//! counterexample processing, and the outer learn loop.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::alphabet::{SymbolKind, TaggedAlphabet, TaggedString};
use crate::error::{Error, Result};
use crate::machine::{Sevpa, StateId};
use crate::oracle::TaggedOracle;

/// A test word for module i >= 1: membership is probed on
/// `before · <a_i · access · after`. The call symbol is implied by the
/// module, so only the surrounding context is stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextTest {
    pub before: TaggedString,
    pub after: TaggedString,
}

/// A string on which hypothesis and oracle disagree.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub raw: String,
    pub tagged: TaggedString,
    pub verdict_oracle: bool,
    pub verdict_hypothesis: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LearnerConfig {
    /// Hard cap on the total access-word count; exceeding it aborts, since a
    /// diverging close() means the tagged language is not learnable as given.
    pub max_states: usize,
    /// Cap on equivalence rounds before returning the best machine unflagged.
    pub max_rounds: usize,
    /// Run separability/closedness audits after every mutation.
    pub audit: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            max_states: 4096,
            max_rounds: 256,
            audit: cfg!(debug_assertions),
        }
    }
}

/// Per-round trace record for the optional learn log.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub access_words: Vec<usize>,
    pub test_words: Vec<usize>,
    pub unique_queries: u64,
    pub counterexample: Option<String>,
    /// Unique queries spent inside counterexample processing this round.
    pub counterexample_queries: u64,
}

/// A hypothesis machine together with the access word of every state.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub machine: Sevpa,
    pub access: Vec<TaggedString>,
}

/// Result of the learn loop.
#[derive(Debug)]
pub struct LearnOutcome {
    pub machine: Sevpa,
    pub access: Vec<TaggedString>,
    pub converged: bool,
    pub rounds: usize,
    pub trace: Vec<RoundRecord>,
}

/// One-symbol and nested-word extensions used for closedness.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Extension {
    Plain(char),
    Nested { pair: usize, inner: TaggedString },
}

/// The observation structure: access words Q_0..Q_k, suffix tests C_0, and
/// context tests C_1..C_k, kept separable at all times.
pub struct Observation<'a> {
    oracle: &'a dyn TaggedOracle,
    alphabet: TaggedAlphabet,
    access: Vec<Vec<TaggedString>>,
    c0: Vec<TaggedString>,
    ci: Vec<Vec<ContextTest>>,
    cfg: LearnerConfig,
}

impl<'a> Observation<'a> {
    /// Q_i = {ε} for all modules; C_0 = {ε}; C_j starts with one context per
    /// return symbol, pruning nothing even for pairs that never co-occur.
    pub fn new(
        oracle: &'a dyn TaggedOracle,
        alphabet: TaggedAlphabet,
        cfg: LearnerConfig,
    ) -> Observation<'a> {
        let k = alphabet.k();
        let access = vec![vec![TaggedString::empty()]; k + 1];
        let c0 = vec![TaggedString::empty()];
        let mut ci = Vec::with_capacity(k);
        for _ in 0..k {
            let tests = (0..k)
                .map(|p| ContextTest {
                    before: TaggedString::empty(),
                    after: TaggedString::new(vec![alphabet.return_symbol(p)]),
                })
                .collect();
            ci.push(tests);
        }
        Observation {
            oracle,
            alphabet,
            access,
            c0,
            ci,
            cfg,
        }
    }

    pub fn alphabet(&self) -> &TaggedAlphabet {
        &self.alphabet
    }

    pub fn access_words(&self, module: usize) -> &[TaggedString] {
        &self.access[module]
    }

    pub fn access_sizes(&self) -> Vec<usize> {
        self.access.iter().map(|m| m.len()).collect()
    }

    pub fn test_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.c0.len()];
        sizes.extend(self.ci.iter().map(|c| c.len()));
        sizes
    }

    fn total_states(&self) -> usize {
        self.access.iter().map(|m| m.len()).sum()
    }

    /// Membership of `word` composed into the module's test context.
    fn probe(&self, module: usize, test_idx: usize, word: &TaggedString) -> Result<bool> {
        if module == 0 {
            let composed = TaggedString::concat(&[word, &self.c0[test_idx]]);
            self.oracle.member(&composed)
        } else {
            let test = &self.ci[module - 1][test_idx];
            let call = TaggedString::new(vec![self.alphabet.call_symbol(module - 1)]);
            let composed = TaggedString::concat(&[&test.before, &call, word, &test.after]);
            self.oracle.member(&composed)
        }
    }

    fn test_count(&self, module: usize) -> usize {
        if module == 0 {
            self.c0.len()
        } else {
            self.ci[module - 1].len()
        }
    }

    /// C_i-equivalence of two well-matched words in the given module.
    pub fn c_equivalent(
        &self,
        module: usize,
        w1: &TaggedString,
        w2: &TaggedString,
    ) -> Result<bool> {
        if w1 == w2 {
            return Ok(true);
        }
        for t in 0..self.test_count(module) {
            if self.probe(module, t, w1)? != self.probe(module, t, w2)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Index of the first access word equivalent to `word`, if any.
    fn representative(&self, module: usize, word: &TaggedString) -> Result<Option<usize>> {
        for (idx, q) in self.access[module].iter().enumerate() {
            if self.c_equivalent(module, word, q)? {
                return Ok(Some(idx));
            }
        }
        Ok(None)
    }

    fn extend(&self, word: &TaggedString, ext: &Extension) -> TaggedString {
        let mut out = word.clone();
        match ext {
            Extension::Plain(c) => out.push(self.alphabet.plain_symbol(*c)),
            Extension::Nested { pair, inner } => {
                out.push(self.alphabet.call_symbol(*pair));
                out.append(inner);
                out.push(self.alphabet.return_symbol(*pair));
            }
        }
        out
    }

    /// Current extension set: every plain symbol plus the nested words
    /// built from the access words of each bracket module. Extensions that
    /// would break well-matchedness of access words (bare brackets,
    /// cross-pair nestings) contribute no states and are omitted.
    fn extensions(&self) -> Vec<Extension> {
        let mut out: Vec<Extension> = self
            .alphabet
            .plains()
            .iter()
            .map(|&c| Extension::Plain(c))
            .collect();
        for module in 1..=self.alphabet.k() {
            for q in &self.access[module] {
                out.push(Extension::Nested {
                    pair: module - 1,
                    inner: q.clone(),
                });
            }
        }
        out
    }

    /// Worklist closing pass: extends any access word whose one-symbol or
    /// nested-word successor has no equivalent representative, feeding new
    /// nested words back into the work list until a fixpoint.
    pub fn close(&mut self) -> Result<()> {
        let mut sigma = self.extensions();
        let mut work: VecDeque<(usize, TaggedString, usize)> = VecDeque::new();
        for module in 0..=self.alphabet.k() {
            for q in &self.access[module] {
                for e in 0..sigma.len() {
                    work.push_back((module, q.clone(), e));
                }
            }
        }
        while let Some((module, word, e)) = work.pop_front() {
            let candidate = self.extend(&word, &sigma[e]);
            if self.representative(module, &candidate)?.is_some() {
                continue;
            }
            self.access[module].push(candidate.clone());
            if self.total_states() > self.cfg.max_states {
                return Err(Error::Invariant(format!(
                    "access-word budget of {} exceeded while closing; the tagged language \
                     does not appear to be learnable with the current tagging",
                    self.cfg.max_states
                )));
            }
            for e2 in 0..sigma.len() {
                work.push_back((module, candidate.clone(), e2));
            }
            if module > 0 {
                sigma.push(Extension::Nested {
                    pair: module - 1,
                    inner: candidate,
                });
                let idx = sigma.len() - 1;
                for j in 0..=self.alphabet.k() {
                    for q in &self.access[j] {
                        work.push_back((j, q.clone(), idx));
                    }
                }
            }
        }
        if self.cfg.audit {
            self.audit_separable()?;
            self.audit_closed()?;
        }
        Ok(())
    }

    /// Independent separability audit: no two access words of a module may
    /// agree on every test.
    pub fn audit_separable(&self) -> Result<()> {
        for module in 0..=self.alphabet.k() {
            let words = &self.access[module];
            for i in 0..words.len() {
                for j in (i + 1)..words.len() {
                    if self.c_equivalent(module, &words[i], &words[j])? {
                        return Err(Error::Invariant(format!(
                            "separability violated in module {module}: {:?} ~ {:?}",
                            words[i].untag(),
                            words[j].untag()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Independent closedness audit over the full extension set.
    pub fn audit_closed(&self) -> Result<()> {
        let sigma = self.extensions();
        for module in 0..=self.alphabet.k() {
            for q in &self.access[module] {
                for ext in &sigma {
                    let candidate = self.extend(q, ext);
                    if self.representative(module, &candidate)?.is_none() {
                        return Err(Error::Invariant(format!(
                            "closedness violated in module {module} at {:?}",
                            candidate.untag()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the hypothesis machine from a separable and closed structure.
    /// States are access words; plain and return transitions go to the
    /// equivalent representative, which exists by closedness and is unique
    /// by separability.
    pub fn construct_vpa(&self) -> Result<Hypothesis> {
        let k = self.alphabet.k();
        let module_sizes = self.access_sizes();
        let mut offsets = Vec::with_capacity(k + 1);
        let mut before = 0;
        for &size in &module_sizes {
            offsets.push(before);
            before += size;
        }
        let global = |module: usize, idx: usize| offsets[module] + idx;

        let mut access = Vec::with_capacity(before);
        for module in 0..=k {
            for q in &self.access[module] {
                access.push(q.clone());
            }
        }
        let require = |module: usize, word: &TaggedString| -> Result<usize> {
            self.representative(module, word)?.ok_or_else(|| {
                Error::Invariant(format!(
                    "closedness violation discovered during construction at {:?}",
                    word.untag()
                ))
            })
        };

        let mut plain_trans: Vec<BTreeMap<char, StateId>> = vec![BTreeMap::new(); before];
        for module in 0..=k {
            for (idx, q) in self.access[module].iter().enumerate() {
                for &c in self.alphabet.plains() {
                    let mut word = q.clone();
                    word.push(self.alphabet.plain_symbol(c));
                    let target = require(module, &word)?;
                    plain_trans[global(module, idx)].insert(c, global(module, target));
                }
            }
        }
        let mut ret_trans: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
        for module in 1..=k {
            let pair = module - 1;
            for (idx, q) in self.access[module].iter().enumerate() {
                for caller_module in 0..=k {
                    for (caller_idx, caller_word) in
                        self.access[caller_module].iter().enumerate()
                    {
                        let mut word = caller_word.clone();
                        word.push(self.alphabet.call_symbol(pair));
                        word.append(q);
                        word.push(self.alphabet.return_symbol(pair));
                        let target = require(caller_module, &word)?;
                        ret_trans.insert(
                            (global(module, idx), global(caller_module, caller_idx)),
                            global(caller_module, target),
                        );
                    }
                }
            }
        }
        let mut accepting = BTreeSet::new();
        for (idx, q) in self.access[0].iter().enumerate() {
            if self.oracle.member(q)? {
                accepting.insert(global(0, idx));
            }
        }
        let entries: Vec<StateId> = (0..=k).map(|m| global(m, 0)).collect();
        for (module, &e) in entries.iter().enumerate() {
            debug_assert!(
                access[e].is_empty(),
                "entry of module {module} must be the empty access word"
            );
        }
        let machine = Sevpa::new(
            self.alphabet.clone(),
            module_sizes,
            entries,
            accepting,
            plain_trans,
            ret_trans,
        )?;
        Ok(Hypothesis { machine, access })
    }

    /// Locates the first incorrect state of the hypothesis run on a
    /// counterexample by binary search over membership of stack-context
    /// reconstructions, then adds one access word and one test context to
    /// the affected module.
    pub fn process_counterexample(
        &mut self,
        hyp: &Hypothesis,
        ce: &TaggedString,
    ) -> Result<()> {
        if !ce.is_well_matched() {
            return Err(Error::IllFormedCounterexample(ce.untag()));
        }
        let machine = &hyp.machine;
        let n = ce.len();
        let mut states = Vec::with_capacity(n + 1);
        let mut stacks: Vec<Vec<(StateId, usize)>> = Vec::with_capacity(n + 1);
        let mut state = machine.initial();
        let mut stack: Vec<(StateId, usize)> = Vec::new();
        states.push(state);
        stacks.push(stack.clone());
        for &sym in ce.symbols() {
            state = machine.step(state, &mut stack, sym)?;
            states.push(state);
            stacks.push(stack.clone());
        }
        let target = self.oracle.member(ce)?;
        let hyp_accepts = machine.accepting().contains(&states[n]);
        if hyp_accepts == target {
            return Err(Error::NotACounterexample(ce.untag()));
        }

        let context = |i: usize| -> (TaggedString, TaggedString) {
            let mut before = TaggedString::empty();
            for &(caller, pair) in &stacks[i] {
                before.append(&hyp.access[caller]);
                before.push(self.alphabet.call_symbol(pair));
            }
            (before, ce.slice(i..n))
        };
        let correct = |obs: &Self, i: usize| -> Result<bool> {
            let (before, after) = context(i);
            let composed = TaggedString::concat(&[&before, &hyp.access[states[i]], &after]);
            Ok(obs.oracle.member(&composed)? == target)
        };
        debug_assert!(correct(self, 0)?);
        debug_assert!(!correct(self, n)?);
        let mut lo = 0;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if correct(self, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        let sym = ce.symbols()[lo];
        let q_lo = states[lo];
        let (module, new_access) = match sym.kind {
            SymbolKind::Call(_) => {
                return Err(Error::Invariant(
                    "counterexample boundary landed on a call transition".into(),
                ))
            }
            SymbolKind::Plain => {
                let module = machine.module_of(q_lo);
                let mut word = hyp.access[q_lo].clone();
                word.push(sym);
                (module, word)
            }
            SymbolKind::Return(pair) => {
                let &(caller, pushed) = stacks[lo].last().ok_or_else(|| {
                    Error::Invariant("return transition with empty stack".into())
                })?;
                debug_assert_eq!(pushed, pair);
                let module = machine.module_of(caller);
                let mut word = hyp.access[caller].clone();
                word.push(self.alphabet.call_symbol(pair));
                word.append(&hyp.access[q_lo]);
                word.push(self.alphabet.return_symbol(pair));
                (module, word)
            }
        };
        let (ctx_before, ctx_after) = context(lo + 1);
        self.add_access_and_test(module, new_access, ctx_before, ctx_after)?;
        if self.cfg.audit {
            self.audit_separable()?;
        }
        Ok(())
    }

    fn add_access_and_test(
        &mut self,
        module: usize,
        access: TaggedString,
        ctx_before: TaggedString,
        ctx_after: TaggedString,
    ) -> Result<()> {
        if module == 0 {
            debug_assert!(ctx_before.is_empty());
            if !self.c0.contains(&ctx_after) {
                self.c0.push(ctx_after);
            }
        } else {
            let symbols = ctx_before.symbols();
            let expected = SymbolKind::Call(module - 1);
            if symbols.last().map(|s| s.kind) != Some(expected) {
                return Err(Error::Invariant(
                    "context before an inner-module state must end with the module's call".into(),
                ));
            }
            let test = ContextTest {
                before: ctx_before.slice(0..symbols.len() - 1),
                after: ctx_after,
            };
            if !self.ci[module - 1].contains(&test) {
                self.ci[module - 1].push(test);
            }
        }
        if self.access[module].contains(&access) {
            return Err(Error::Invariant(format!(
                "counterexample produced an access word already present: {:?}",
                access.untag()
            )));
        }
        self.access[module].push(access);
        Ok(())
    }
}

/// The outer loop: close, build a hypothesis, ask for a counterexample,
/// refine. Returns the best machine with a convergence flag when the round
/// budget runs out.
pub fn learn(
    oracle: &dyn TaggedOracle,
    alphabet: TaggedAlphabet,
    find_counterexample: &mut dyn FnMut(&Hypothesis) -> Result<Option<Counterexample>>,
    cfg: LearnerConfig,
) -> Result<LearnOutcome> {
    let mut obs = Observation::new(oracle, alphabet, cfg);
    oracle.set_phase(crate::oracle::QueryPhase::VpaLearn);
    obs.close()?;
    let mut trace = Vec::new();
    for round in 1..=cfg.max_rounds {
        let hyp = obs.construct_vpa()?;
        oracle.set_phase(crate::oracle::QueryPhase::EquivSim);
        let ce = find_counterexample(&hyp)?;
        oracle.set_phase(crate::oracle::QueryPhase::VpaLearn);
        match ce {
            None => {
                trace.push(RoundRecord {
                    round,
                    access_words: obs.access_sizes(),
                    test_words: obs.test_sizes(),
                    unique_queries: oracle.unique_queries(),
                    counterexample: None,
                    counterexample_queries: 0,
                });
                return Ok(LearnOutcome {
                    machine: hyp.machine,
                    access: hyp.access,
                    converged: true,
                    rounds: round,
                    trace,
                });
            }
            Some(ce) => {
                if !ce.tagged.is_well_matched() {
                    return Err(Error::IllFormedCounterexample(ce.raw));
                }
                let before = oracle.unique_queries();
                obs.process_counterexample(&hyp, &ce.tagged)?;
                let spent = oracle.unique_queries() - before;
                obs.close()?;
                trace.push(RoundRecord {
                    round,
                    access_words: obs.access_sizes(),
                    test_words: obs.test_sizes(),
                    unique_queries: oracle.unique_queries(),
                    counterexample: Some(ce.raw),
                    counterexample_queries: spent,
                });
            }
        }
    }
    let hyp = obs.construct_vpa()?;
    Ok(LearnOutcome {
        machine: hyp.machine,
        access: hyp.access,
        converged: false,
        rounds: cfg.max_rounds,
        trace,
    })
}
