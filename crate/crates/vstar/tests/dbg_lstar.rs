mod common;
use common::toy_xml_member;
use vstar::lstar::{lstar_learn, DfaTeacher, LstarBudget};

#[test]
fn dump() {
    // call side of anchor span (0,3) on pattern (u="", x="<p>", z="<p>p", y="</p>", v="</p>")
    let alphabet: Vec<char> = {
        let mut v: Vec<char> = "<p>/".chars().collect();
        v.sort();
        v
    };
    println!("alphabet {alphabet:?}");
    let mut tests: Vec<String> = Vec::new();
    let frag: Vec<char> = "<p>".chars().collect();
    for i in 0..=frag.len() {
        for j in 0..=frag.len() {
            let mut t: String = frag[..i].iter().collect();
            t.extend(&frag[j..]);
            if !tests.contains(&t) { tests.push(t); }
        }
    }
    println!("tests {tests:?}");
    let mut member = |w: &str| -> vstar::error::Result<bool> {
        let q = format!("{w}<p>p</p></p>");
        Ok(toy_xml_member(&q))
    };
    let out = lstar_learn(&mut member, &alphabet, DfaTeacher::Tests(&tests), LstarBudget::default()).unwrap();
    println!("converged={} states={} accepts <p>={} accepts p>={}", out.converged, out.dfa.state_count(), out.dfa.accepts("<p>"), out.dfa.accepts("p>"));
    for w in ["", "<", "<p", "<p>", "p>", "<p><p>", "<p>p"] {
        println!("  dfa({w:?}) = {}", out.dfa.accepts(w));
    }
}
