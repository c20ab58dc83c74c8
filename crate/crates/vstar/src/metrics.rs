//! Accuracy metrics over learned machines, the evaluation report, and the
//! recursion-witness seed generator used to build fixture seed sets.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conformance::Imager;
use crate::error::{Error, Result};
use crate::grammar::{Rule, Vpg};
use crate::machine::{RunOutcome, Sevpa};
use crate::oracle::{CachedOracle, QueryStats};

/// Fraction of the positive dataset accepted by the learned machine.
pub fn recall(machine: &Sevpa, imager: &dyn Imager, dataset: &[String]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Config("recall is undefined on an empty dataset".into()));
    }
    let mut accepted = 0usize;
    for s in dataset {
        let image = imager.image(s)?;
        if machine.run(&image)? == RunOutcome::Accept {
            accepted += 1;
        }
    }
    Ok(accepted as f64 / dataset.len() as f64)
}

/// Fraction of `samples` strings drawn from the learned grammar that the
/// oracle accepts.
pub fn precision<R: Rng>(
    machine: &Sevpa,
    imager: &dyn Imager,
    oracle: &CachedOracle,
    samples: usize,
    max_depth: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Config("precision needs a positive sample count".into()));
    }
    let grammar = machine.to_vpg()?;
    let drawn = grammar.sample(samples, max_depth, rng)?;
    let mut accepted = 0usize;
    for image in &drawn {
        let raw = imager.raw_of(image);
        if oracle.query(&raw)? {
            accepted += 1;
        }
    }
    Ok(accepted as f64 / samples as f64)
}

/// Harmonic mean of recall and precision; zero when either is zero.
pub fn f1(recall: f64, precision: f64) -> f64 {
    if recall <= 0.0 || precision <= 0.0 {
        0.0
    } else {
        2.0 / (1.0 / recall + 1.0 / precision)
    }
}

/// Evaluation summary. Wall time is kept out of the serialized form so
/// repeated runs produce identical artifacts; it is reported separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub stats: QueryStats,
    pub corpus_size: usize,
    pub sample_size: usize,
    pub dataset_size: usize,
    #[serde(skip)]
    pub elapsed_secs: Option<f64>,
}

impl EvalReport {
    /// Aligned text table with the usual accuracy and query columns.
    pub fn to_table(&self) -> String {
        let total = self.stats.unique.max(1) as f64;
        let pct_token = 100.0 * self.stats.unique_token_infer as f64 / total;
        let pct_vpa =
            100.0 * (self.stats.unique_vpa_learn + self.stats.unique_equiv_sim) as f64 / total;
        let time = match self.elapsed_secs {
            Some(t) => format!("{t:.1}s"),
            None => "-".to_string(),
        };
        let mut out = String::new();
        out.push_str(
            "Recall  Precision  F1    #Queries  %Q(Token)  %Q(VPA)  #TS      Time\n",
        );
        out.push_str(&format!(
            "{:<7.2} {:<10.2} {:<5.2} {:<9} {:<10.2} {:<8.2} {:<8} {}\n",
            self.recall,
            self.precision,
            self.f1,
            self.stats.unique,
            pct_token,
            pct_vpa,
            self.corpus_size,
            time,
        ));
        out
    }
}

fn shorter(a: &Option<String>, b: &String) -> bool {
    match a {
        None => true,
        Some(a) => (b.len(), b) < (a.len(), a),
    }
}

/// Shortest terminal expansion of each nonterminal, empty allowed.
fn shortest_strings(g: &Vpg) -> Vec<Option<String>> {
    let n = g.nonterminals().len();
    let mut best: Vec<Option<String>> = vec![None; n];
    loop {
        let mut changed = false;
        for nt in 0..n {
            for rule in g.rules_of(nt) {
                let candidate = match *rule {
                    Rule::Empty => Some(String::new()),
                    Rule::Linear { plain, next } => best[next]
                        .as_ref()
                        .map(|s| format!("{plain}{s}")),
                    Rule::Matching { pair, inner, next } => {
                        match (&best[inner], &best[next]) {
                            (Some(i), Some(x)) => Some(format!(
                                "{}{i}{}{x}",
                                g.alphabet().call_char(pair),
                                g.alphabet().return_char(pair)
                            )),
                            _ => None,
                        }
                    }
                };
                if let Some(c) = candidate {
                    if shorter(&best[nt], &c) {
                        best[nt] = Some(c);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return best;
        }
    }
}

/// Shortest non-empty expansion; falls back to the empty string when the
/// nonterminal derives nothing else.
fn shortest_nonempty(g: &Vpg, plain_shortest: &[Option<String>]) -> Vec<Option<String>> {
    let n = g.nonterminals().len();
    let mut best: Vec<Option<String>> = vec![None; n];
    loop {
        let mut changed = false;
        for nt in 0..n {
            for rule in g.rules_of(nt) {
                let candidate = match *rule {
                    Rule::Empty => None,
                    Rule::Linear { plain, next } => plain_shortest[next]
                        .as_ref()
                        .map(|s| format!("{plain}{s}")),
                    Rule::Matching { pair, inner, next } => {
                        match (&plain_shortest[inner], &plain_shortest[next]) {
                            (Some(i), Some(x)) => Some(format!(
                                "{}{i}{}{x}",
                                g.alphabet().call_char(pair),
                                g.alphabet().return_char(pair)
                            )),
                            _ => None,
                        }
                    }
                };
                if let Some(c) = candidate {
                    if shorter(&best[nt], &c) {
                        best[nt] = Some(c);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return best;
        }
    }
}

/// Shortest terminal context (pre, post) with `from ⇒* pre · target · post`,
/// or None when the target is unreachable from `from`.
fn shortest_context(g: &Vpg, target: usize, shortest: &[Option<String>]) -> Vec<Option<(String, String)>> {
    let n = g.nonterminals().len();
    let mut best: Vec<Option<(String, String)>> = vec![None; n];
    best[target] = Some((String::new(), String::new()));
    let better = |old: &Option<(String, String)>, new: &(String, String)| -> bool {
        match old {
            None => true,
            Some((op, oq)) => {
                let ol = op.len() + oq.len();
                let nl = new.0.len() + new.1.len();
                (nl, &new.0, &new.1) < (ol, op, oq)
            }
        }
    };
    loop {
        let mut changed = false;
        for nt in 0..n {
            for rule in g.rules_of(nt) {
                let candidates: Vec<(String, String)> = match *rule {
                    Rule::Empty => vec![],
                    Rule::Linear { plain, next } => best[next]
                        .iter()
                        .map(|(p, q)| (format!("{plain}{p}"), q.clone()))
                        .collect(),
                    Rule::Matching { pair, inner, next } => {
                        let call = g.alphabet().call_char(pair);
                        let ret = g.alphabet().return_char(pair);
                        let mut v = Vec::new();
                        if let (Some((p, q)), Some(w_next)) = (&best[inner], &shortest[next]) {
                            v.push((format!("{call}{p}"), format!("{q}{ret}{w_next}")));
                        }
                        if let (Some(w_inner), Some((p, q))) = (&shortest[inner], &best[next]) {
                            v.push((format!("{call}{w_inner}{ret}{p}"), q.clone()));
                        }
                        v
                    }
                };
                for c in candidates {
                    if better(&best[nt], &c) {
                        best[nt] = Some(c);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return best;
        }
    }
}

/// For each matching rule whose inner nonterminal can reach the rule's own
/// head again, emits witness strings of d-fold recursion for d = 1..=depth.
/// Tag structure is discarded: witnesses are raw seed strings.
pub fn derive_seed_strings(g: &Vpg, depth: usize) -> Vec<String> {
    let shortest = shortest_strings(g);
    let nonempty = shortest_nonempty(g, &shortest);
    let mut out: Vec<String> = Vec::new();
    for head in 0..g.nonterminals().len() {
        let has_matching = g
            .rules_of(head)
            .iter()
            .any(|r| matches!(r, Rule::Matching { .. }));
        if !has_matching {
            continue;
        }
        let contexts = shortest_context(g, head, &shortest);
        for rule in g.rules_of(head) {
            let Rule::Matching { pair, inner, next } = *rule else {
                continue;
            };
            let Some((pre, post)) = contexts[inner].clone() else {
                continue; // inner cannot re-reach the head
            };
            let Some((sp, sq)) = contexts[g.start()].clone() else {
                continue;
            };
            let call = g.alphabet().call_char(pair);
            let ret = g.alphabet().return_char(pair);
            let core = nonempty[head]
                .clone()
                .or_else(|| shortest[head].clone())
                .unwrap_or_default();
            let inner_next = shortest[next].clone().unwrap_or_default();
            let outer_next = nonempty[next]
                .clone()
                .or_else(|| shortest[next].clone())
                .unwrap_or_default();
            for d in 1..=depth.max(1) {
                let mut w = sp.clone();
                for _ in 0..d {
                    w.push(call);
                    w.push_str(&pre);
                }
                w.push_str(&core);
                for level in (0..d).rev() {
                    w.push_str(&post);
                    w.push(ret);
                    if level == 0 {
                        w.push_str(&outer_next);
                    } else {
                        w.push_str(&inner_next);
                    }
                }
                w.push_str(&sq);
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::TaggedAlphabet;

    fn fig1() -> Vpg {
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

    #[test]
    fn f1_of_perfect_scores() {
        assert_eq!(f1(1.0, 1.0), 1.0);
    }

    #[test]
    fn f1_half_recall() {
        assert!((f1(0.5, 1.0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn f1_matches_reported_rounding() {
        let v = f1(0.42, 0.98);
        assert_eq!(format!("{:.2}", v), "0.59");
    }

    #[test]
    fn f1_is_symmetric() {
        for (r, p) in [(0.3, 0.7), (0.0, 0.9), (1.0, 0.25)] {
            assert_eq!(f1(r, p), f1(p, r));
        }
    }

    #[test]
    fn derived_seeds_contain_single_and_double_recursion_witnesses() {
        let seeds = derive_seed_strings(&fig1(), 2);
        assert!(seeds.contains(&"agcdhbcd".to_string()), "{seeds:?}");
        assert!(seeds.contains(&"agagcdhbhbcd".to_string()), "{seeds:?}");
    }

    #[test]
    fn derived_seeds_are_all_in_the_language() {
        let g = fig1();
        let oracle = CachedOracle::from_vpg(g.clone());
        for s in derive_seed_strings(&g, 3) {
            assert!(oracle.query(&s).unwrap(), "witness {s:?} must be accepted");
        }
    }

    #[test]
    fn grammar_without_matching_rules_yields_no_seeds() {
        let alphabet = TaggedAlphabet::new(vec![], "c".chars());
        let g = Vpg::new(
            alphabet,
            vec!["S".into()],
            0,
            vec![vec![Rule::Linear { plain: 'c', next: 0 }, Rule::Empty]],
        )
        .unwrap();
        assert!(derive_seed_strings(&g, 2).is_empty());
    }
}
