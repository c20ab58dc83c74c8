//! Shared test support: fixture loading, independent brute-force oracles,
//! and hand recognizers for the token-level languages.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use vstar::alphabet::TaggedString;
use vstar::grammar::{Rule, Vpg};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> Vpg {
    Vpg::load(&fixture_path(name)).expect("fixture grammar loads")
}

/// Independent oracle: all strings derivable from the grammar start symbol
/// with length at most `max_len`, by breadth-first expansion of sentential
/// forms. Deliberately ignorant of the production recognizer's subset scan.
pub fn enumerate_language(g: &Vpg, max_len: usize) -> BTreeSet<String> {
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Item {
        Term(char),
        Nt(usize),
    }
    // minimal completion length per nonterminal, for pruning
    let n = g.nonterminals().len();
    let mut min_len: Vec<Option<usize>> = vec![None; n];
    loop {
        let mut changed = false;
        for nt in 0..n {
            for rule in g.rules_of(nt) {
                let candidate = match *rule {
                    Rule::Empty => Some(0),
                    Rule::Linear { next, .. } => min_len[next].map(|c| c + 1),
                    Rule::Matching { inner, next, .. } => match (min_len[inner], min_len[next]) {
                        (Some(a), Some(b)) => Some(a + b + 2),
                        _ => None,
                    },
                };
                if let Some(c) = candidate {
                    if min_len[nt].map_or(true, |old| c < old) {
                        min_len[nt] = Some(c);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let form_min = |form: &[Item]| -> Option<usize> {
        let mut total = 0usize;
        for item in form {
            total += match item {
                Item::Term(_) => 1,
                Item::Nt(nt) => min_len[*nt]?,
            };
        }
        Some(total)
    };

    let mut out = BTreeSet::new();
    let mut seen: BTreeSet<Vec<Item>> = BTreeSet::new();
    let mut work: Vec<Vec<Item>> = vec![vec![Item::Nt(g.start())]];
    while let Some(form) = work.pop() {
        match form_min(&form) {
            Some(m) if m <= max_len => {}
            _ => continue,
        }
        // expand the leftmost nonterminal
        match form.iter().position(|i| matches!(i, Item::Nt(_))) {
            None => {
                let s: String = form
                    .iter()
                    .map(|i| match i {
                        Item::Term(c) => *c,
                        Item::Nt(_) => unreachable!(),
                    })
                    .collect();
                out.insert(s);
            }
            Some(pos) => {
                let Item::Nt(nt) = form[pos] else { unreachable!() };
                for rule in g.rules_of(nt) {
                    let mut next_form: Vec<Item> = form[..pos].to_vec();
                    match *rule {
                        Rule::Empty => {}
                        Rule::Linear { plain, next } => {
                            next_form.push(Item::Term(plain));
                            next_form.push(Item::Nt(next));
                        }
                        Rule::Matching { pair, inner, next } => {
                            next_form.push(Item::Term(g.alphabet().call_char(pair)));
                            next_form.push(Item::Nt(inner));
                            next_form.push(Item::Term(g.alphabet().return_char(pair)));
                            next_form.push(Item::Nt(next));
                        }
                    }
                    next_form.extend(form[pos + 1..].iter().cloned());
                    if form_min(&next_form).is_some_and(|m| m <= max_len) && seen.insert(next_form.clone())
                    {
                        work.push(next_form);
                    }
                }
            }
        }
    }
    out
}

/// All raw strings over `chars` up to `max_len`, shortest first.
pub fn all_strings(chars: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * chars.len());
        for s in &frontier {
            for &c in chars {
                let mut sc = s.clone();
                sc.push(c);
                next.push(sc);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Hand recognizer for the toy XML language: `<p>`^n w `</p>`^n with w a
/// non-empty lowercase word, n >= 0.
pub fn toy_xml_member(s: &str) -> bool {
    let mut rest = s;
    loop {
        if rest.starts_with("<p>") && rest.ends_with("</p>") && rest.len() >= 7 {
            rest = &rest[3..rest.len() - 4];
        } else {
            return !rest.is_empty() && rest.chars().all(|c| c.is_ascii_lowercase());
        }
    }
}

/// Hand recognizer for the two-tag single-child XML language:
/// E -> <a>E</a> | <b>E</b> | [cd]+.
pub fn mini_xml_member(s: &str) -> bool {
    if s.starts_with("<a>") && s.ends_with("</a>") && s.len() >= 7 {
        return mini_xml_member(&s[3..s.len() - 4]);
    }
    if s.starts_with("<b>") && s.ends_with("</b>") && s.len() >= 7 {
        return mini_xml_member(&s[3..s.len() - 4]);
    }
    !s.is_empty() && s.chars().all(|c| c == 'c' || c == 'd')
}

/// Random positive example of the toy XML language.
pub fn toy_xml_sample<R: Rng>(rng: &mut R, max_depth: usize) -> String {
    let depth = rng.gen_range(0..=max_depth);
    let text_len = rng.gen_range(1..=3);
    let text: String = (0..text_len)
        .map(|_| if rng.gen_bool(0.7) { 'p' } else { 'q' })
        .collect();
    let mut s = String::new();
    for _ in 0..depth {
        s.push_str("<p>");
    }
    s.push_str(&text);
    for _ in 0..depth {
        s.push_str("</p>");
    }
    s
}

/// Random positive example of the two-tag XML language.
pub fn mini_xml_sample<R: Rng>(rng: &mut R, max_depth: usize) -> String {
    fn gen<R: Rng>(rng: &mut R, depth: usize) -> String {
        if depth == 0 || rng.gen_bool(0.35) {
            let len = rng.gen_range(1..=3);
            return (0..len)
                .map(|_| if rng.gen_bool(0.5) { 'c' } else { 'd' })
                .collect();
        }
        let inner = gen(rng, depth - 1);
        if rng.gen_bool(0.5) {
            format!("<a>{inner}</a>")
        } else {
            format!("<b>{inner}</b>")
        }
    }
    gen(rng, max_depth)
}

/// Small JSON-flavored validator: objects with string keys (arbitrary
/// non-quote characters, braces included), values true/false or nested
/// objects. The top level is a value.
pub fn json_member(s: &str) -> bool {
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
    let chars: Vec<char> = s.chars().collect();
    value(&chars, 0) == Some(chars.len())
}

/// Machine-vs-grammar verdict comparison helper.
pub fn untag_set(strings: &BTreeSet<String>) -> BTreeSet<String> {
    strings.clone()
}

pub fn tagged_to_raw(s: &TaggedString) -> String {
    s.untag()
}
