//! Character-level tagging inference: backtracking search over call/return
//! character pairs compatible with all nesting patterns of the seeds.

use crate::alphabet::Tagging;
use crate::error::{Error, Result};
use crate::nesting::{candidate_nesting, NestingLimits, NestingPattern};
use crate::oracle::CachedOracle;

#[derive(Debug, Clone)]
pub struct TagInferConfig {
    /// Escalating pumping bound; the search restarts at each bound until the
    /// cap is reached.
    pub k_cap: usize,
    pub limits: NestingLimits,
}

impl Default for TagInferConfig {
    fn default() -> Self {
        TagInferConfig {
            k_cap: 6,
            limits: NestingLimits::default(),
        }
    }
}

/// A successful inference: the tagging plus the validated pattern
/// certificate it covers.
#[derive(Debug, Clone)]
pub struct TagInference {
    pub tagging: Tagging,
    pub patterns: Vec<NestingPattern>,
    pub bound_used: usize,
}

/// True iff some pair of the tagging has an unmatched call inside the
/// pattern's x and an unmatched return of the same pair inside its y.
pub fn is_compatible_tagging(tagging: &Tagging, pattern: &NestingPattern) -> bool {
    let x_profile = tagging.apply_unchecked(&pattern.x()).unmatched_profile();
    if x_profile.pending_calls.is_empty() {
        return false;
    }
    let y_profile = tagging.apply_unchecked(&pattern.y()).unmatched_profile();
    x_profile
        .pending_calls
        .iter()
        .any(|p| y_profile.pending_returns.contains(p))
}

fn seeds_well_matched(tagging: &Tagging, seeds: &[String]) -> bool {
    seeds
        .iter()
        .all(|s| tagging.apply_unchecked(s).is_well_matched())
}

/// Candidate call characters of a pattern: x's characters left to right,
/// first occurrence only.
fn call_candidates(pattern: &NestingPattern) -> Vec<char> {
    let mut out = Vec::new();
    for c in pattern.x().chars() {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Candidate return characters: y's characters right to left, so the
/// outermost closing character is tried first.
fn return_candidates(pattern: &NestingPattern) -> Vec<char> {
    let mut out = Vec::new();
    for c in pattern.y().chars().rev() {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn search(
    seeds: &[String],
    pending: &[NestingPattern],
    done: &mut Vec<NestingPattern>,
    tagging: &Tagging,
) -> Option<Tagging> {
    let Some((pattern, rest)) = pending.split_first() else {
        return Some(tagging.clone());
    };
    if is_compatible_tagging(tagging, pattern) {
        done.push(pattern.clone());
        let result = search(seeds, rest, done, tagging);
        done.pop();
        return result;
    }
    let used: Vec<char> = tagging
        .pairs()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    for a in call_candidates(pattern) {
        if used.contains(&a) {
            continue;
        }
        for &b in &return_candidates(pattern) {
            if b == a || used.contains(&b) {
                continue;
            }
            let mut pairs = tagging.pairs().to_vec();
            pairs.push((a, b));
            let extended = Tagging::new(pairs).expect("unique pairing enforced by skip");
            if !seeds_well_matched(&extended, seeds) {
                continue;
            }
            if !is_compatible_tagging(&extended, pattern)
                || !done.iter().all(|q| is_compatible_tagging(&extended, q))
            {
                continue;
            }
            done.push(pattern.clone());
            if let Some(result) = search(seeds, rest, done, &extended) {
                return Some(result);
            }
            done.pop();
        }
    }
    None
}

/// Infers a tagging compatible with the seeds, escalating the pumping bound
/// from 2 up to the configured cap. Returns `None` when the cap is exhausted
/// without finding one. Seeds must all be accepted by the oracle.
pub fn tag_infer(
    oracle: &CachedOracle,
    seeds: &[String],
    cfg: &TagInferConfig,
) -> Result<Option<TagInference>> {
    for seed in seeds {
        if !oracle.query(seed)? {
            return Err(Error::SeedRejected(seed.clone()));
        }
    }
    for bound in 2..=cfg.k_cap.max(2) {
        let patterns = candidate_nesting(oracle, seeds, bound, cfg.limits)?;
        let mut done = Vec::new();
        if let Some(tagging) = search(seeds, &patterns, &mut done, &Tagging::empty()) {
            return Ok(Some(TagInference {
                tagging,
                patterns,
                bound_used: bound,
            }));
        }
    }
    Ok(None)
}

/// Re-checks a finished inference: seeds well-matched and every certificate
/// pattern covered. Used by tests and as a post-inference audit.
pub fn audit(inference: &TagInference, seeds: &[String]) -> bool {
    seeds_well_matched(&inference.tagging, seeds)
        && inference
            .patterns
            .iter()
            .all(|p| is_compatible_tagging(&inference.tagging, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compatible_tagging_on_outer_pair() {
        let p = NestingPattern::new("agcdcdhbcd", (0, 2, 6, 8), 2);
        let t = Tagging::new([('a', 'b')]).unwrap();
        assert!(is_compatible_tagging(&t, &p));
    }

    #[test]
    fn compatible_tagging_on_inner_pair() {
        let p = NestingPattern::new("agcdcdhbcd", (0, 2, 6, 8), 2);
        let t = Tagging::new([('g', 'h')]).unwrap();
        assert!(is_compatible_tagging(&t, &p));
    }

    #[test]
    fn empty_tagging_is_incompatible_with_any_pattern() {
        let p = NestingPattern::new("agcdcdhbcd", (0, 2, 6, 8), 2);
        assert!(!is_compatible_tagging(&Tagging::empty(), &p));
    }

    #[test]
    fn regular_language_yields_empty_tagging() {
        let oracle = CachedOracle::from_fn(|s: &str| s.chars().all(|c| c == 'c'));
        let result = tag_infer(&oracle, &["cc".into()], &TagInferConfig::default())
            .unwrap()
            .unwrap();
        assert!(result.tagging.is_empty());
        assert!(result.patterns.is_empty());
    }

    #[test]
    fn a_power_b_power_learns_ab_pair() {
        let oracle = CachedOracle::from_fn(|s: &str| {
            let n = s.len();
            let half = n / 2;
            n % 2 == 0
                && s[..half].chars().all(|c| c == 'a')
                && s[half..].chars().all(|c| c == 'b')
        });
        let result = tag_infer(&oracle, &["aabb".into()], &TagInferConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(result.tagging.pairs(), &[('a', 'b')]);
        assert!(audit(&result, &["aabb".into()]));
    }

    #[test]
    fn rejected_seed_is_a_precondition_error() {
        let oracle = CachedOracle::from_fn(|_| false);
        assert!(matches!(
            tag_infer(&oracle, &["x".into()], &TagInferConfig::default()),
            Err(Error::SeedRejected(_))
        ));
    }
}
