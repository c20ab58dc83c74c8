//! Token-level inference and learning: tokenizer discovery on the toy XML
//! language, bracket conversion, degeneration to character pairs, and the
//! full token-mode pipeline.

mod common;

use common::{load_fixture, mini_xml_member, toy_xml_member};
use vstar::machine::RunOutcome;
use vstar::oracle::CachedOracle;
use vstar::pipeline::{run_learn, Mode, PipelineConfig};
use vstar::tokens::{token_infer, TokenInferConfig};

fn toy_xml_oracle() -> CachedOracle {
    CachedOracle::from_fn(|s: &str| toy_xml_member(s))
}

fn toy_xml_seeds() -> Vec<String> {
    vec![
        "<p><p>p</p></p>".to_string(),
        "<p><p><p>p</p></p></p>".to_string(),
    ]
}

#[test]
fn token_inference_finds_the_tag_pair() {
    let oracle = toy_xml_oracle();
    let inference = token_infer(&oracle, &toy_xml_seeds(), &TokenInferConfig::default())
        .unwrap()
        .expect("tokenizer found");
    let tokenizer = &inference.tokenizer;
    assert_eq!(tokenizer.pairs.len(), 1);
    let call = &tokenizer.pairs[0].call;
    let ret = &tokenizer.pairs[0].ret;
    assert!(call.accepts("<p>"));
    assert!(ret.accepts("</p>"));
    // the lexical rules are exactly the two tags on short strings
    for s in ["", "<", "p", "<p", "p>", "</p", "/p>", "<p>p", "<p><p>"] {
        assert!(!call.accepts(s), "call lexical rule must reject {s:?}");
    }
    for s in ["", "<", "</", "</p", "p>", "<p>", "/p>", "</p>p"] {
        assert!(!ret.accepts(s), "return lexical rule must reject {s:?}");
    }
}

#[test]
fn conv_reproduces_the_exhibited_bracketing() {
    let oracle = toy_xml_oracle();
    let inference = token_infer(&oracle, &toy_xml_seeds(), &TokenInferConfig::default())
        .unwrap()
        .unwrap();
    let tokenizer = &inference.tokenizer;
    let call = tokenizer.pairs[0].call_sym;
    let ret = tokenizer.pairs[0].ret_sym;
    let image = tokenizer.conv("<p><p>p</p></p>", &oracle).unwrap();
    assert_eq!(
        image.untag(),
        format!("{call}<p>{call}<p>p</p>{ret}</p>{ret}")
    );
    assert!(image.is_well_matched());
    assert_eq!(tokenizer.erase(&image), "<p><p>p</p></p>");
    // default bracket glyphs are free in this base alphabet
    assert_eq!((call, ret), ('\u{25C1}', '\u{25B7}'));
}

#[test]
fn token_mode_pipeline_matches_reference_on_token_closure() {
    let oracle = toy_xml_oracle();
    let cfg = {
        let mut cfg = PipelineConfig::new(Mode::Token);
        cfg.learner.audit = true;
        cfg
    };
    let artifacts = run_learn(&oracle, &toy_xml_seeds(), &cfg).unwrap();
    assert!(artifacts.converged);
    let tokenizer = &artifacts.tokenizer.as_ref().unwrap().tokenizer;

    // bounded enumeration over token sequences: every concatenation of
    // OPEN, CLOSE, and short TEXT realizations, up to five tokens
    let tokens = ["<p>", "</p>", "p", "pp"];
    let mut sequences: Vec<String> = vec![String::new()];
    let mut frontier: Vec<String> = vec![String::new()];
    for _ in 0..5 {
        let mut next = Vec::new();
        for s in &frontier {
            for t in tokens {
                let mut st = s.clone();
                st.push_str(t);
                next.push(st);
            }
        }
        sequences.extend(next.iter().cloned());
        frontier = next;
    }
    let mut checked = 0usize;
    for s in sequences {
        if s.chars().count() > 20 {
            continue;
        }
        let image = tokenizer.conv(&s, &oracle).unwrap();
        let accepted = artifacts.machine.run(&image).unwrap() == RunOutcome::Accept;
        assert_eq!(accepted, toy_xml_member(&s), "{s:?}");
        checked += 1;
    }
    assert!(checked > 300, "checked {checked} strings");
}

#[test]
fn token_inference_degenerates_to_character_pairs() {
    let g = load_fixture("fig1.json");
    let oracle = CachedOracle::from_vpg(g);
    let seeds = vec!["agcdcdhbcd".to_string()];
    let inference = token_infer(&oracle, &seeds, &TokenInferConfig::default())
        .unwrap()
        .expect("tokenizer found");
    let tokenizer = &inference.tokenizer;
    assert_eq!(tokenizer.pairs.len(), 1);
    assert!(tokenizer.pairs[0].call.accepts("a"));
    assert!(tokenizer.pairs[0].ret.accepts("b"));
    for s in ["", "g", "ab", "aa", "c"] {
        assert!(!tokenizer.pairs[0].call.accepts(s), "{s:?}");
    }
    // matches the character-level inference on the same seeds
    let tag = vstar::tag_infer::tag_infer(
        &oracle,
        &seeds,
        &vstar::tag_infer::TagInferConfig::default(),
    )
    .unwrap()
    .unwrap();
    assert_eq!(tag.tagging.pairs(), &[('a', 'b')]);
}

#[test]
fn seeds_without_nesting_patterns_yield_empty_tokenizer() {
    let oracle = CachedOracle::from_fn(|s: &str| s.chars().all(|c| c == 'c'));
    let inference = token_infer(&oracle, &["cc".to_string()], &TokenInferConfig::default())
        .unwrap()
        .unwrap();
    assert!(inference.tokenizer.pairs.is_empty());
}

#[test]
fn mini_xml_two_pair_inference_and_learning() {
    let oracle = CachedOracle::from_fn(|s: &str| mini_xml_member(s));
    let seeds = vec![
        "<a><a>c</a></a>".to_string(),
        "<b><b>d</b></b>".to_string(),
        "<a><b>cd</b></a>".to_string(),
        "<b><a>c</a></b>".to_string(),
    ];
    let mut cfg = PipelineConfig::new(Mode::Token);
    cfg.learner.audit = true;
    let artifacts = run_learn(&oracle, &seeds, &cfg).unwrap();
    assert!(artifacts.converged);
    let tokenizer = &artifacts.tokenizer.as_ref().unwrap().tokenizer;
    assert_eq!(tokenizer.pairs.len(), 2, "both tag pairs discovered");

    // the learned machine matches the reference on every token sequence of
    // up to four tokens
    let tokens = ["<a>", "</a>", "<b>", "</b>", "c", "dd"];
    let mut frontier: Vec<String> = vec![String::new()];
    let mut sequences: Vec<String> = vec![String::new()];
    for _ in 0..4 {
        let mut next = Vec::new();
        for s in &frontier {
            for t in tokens {
                let mut st = s.clone();
                st.push_str(t);
                next.push(st);
            }
        }
        sequences.extend(next.iter().cloned());
        frontier = next;
    }
    for s in sequences {
        let image = tokenizer.conv(&s, &oracle).unwrap();
        let accepted = artifacts.machine.run(&image).unwrap() == RunOutcome::Accept;
        assert_eq!(accepted, mini_xml_member(&s), "{s:?}");
    }
}

#[test]
fn compatible_tokenizer_requires_bracket_in_both_fragments() {
    let oracle = toy_xml_oracle();
    let inference = token_infer(&oracle, &toy_xml_seeds(), &TokenInferConfig::default())
        .unwrap()
        .unwrap();
    let tokenizer = inference.tokenizer;
    // a synthetic pattern whose x and y fragments carry no tags at all
    let pattern = vstar::nesting::NestingPattern::new("<p><p>p</p></p>", (6, 7, 7, 8), 2);
    assert_eq!(pattern.x(), "p");
    assert_eq!(pattern.y(), "<");
    assert!(!vstar::tokens::is_compatible_tokenizer(&tokenizer, &pattern, &oracle).unwrap());
    // the outermost tag pattern is compatible
    let outer = vstar::nesting::NestingPattern::new("<p><p>p</p></p>", (0, 3, 11, 15), 2);
    assert_eq!(outer.x(), "<p>");
    assert_eq!(outer.y(), "</p>");
    assert!(vstar::tokens::is_compatible_tokenizer(&tokenizer, &outer, &oracle).unwrap());
}
