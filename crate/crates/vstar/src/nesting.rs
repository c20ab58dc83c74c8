//! Discovery of candidate nesting patterns in seed strings via bounded
//! pumping experiments, plus the k-repeatability test.

use crate::error::{Error, Result};
use crate::oracle::CachedOracle;

/// A partitioning s = u x z y v with x, y non-empty such that synchronized
/// pumping u x^k z y^k v stays in the language while unsynchronized pumping
/// falls out. Evidence of call/return structure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NestingPattern {
    seed: Vec<char>,
    /// Cut positions (i1, i2, i3, i4): u = [0,i1), x = [i1,i2), z = [i2,i3),
    /// y = [i3,i4), v = [i4,len).
    cuts: (usize, usize, usize, usize),
    /// Bound at which the pattern was validated.
    validated_k: usize,
}

impl NestingPattern {
    pub fn new(seed: &str, cuts: (usize, usize, usize, usize), validated_k: usize) -> Self {
        let seed: Vec<char> = seed.chars().collect();
        let (i1, i2, i3, i4) = cuts;
        assert!(i1 < i2 && i2 <= i3 && i3 < i4 && i4 <= seed.len());
        NestingPattern {
            seed,
            cuts,
            validated_k,
        }
    }

    pub fn seed(&self) -> String {
        self.seed.iter().collect()
    }

    pub fn seed_chars(&self) -> &[char] {
        &self.seed
    }

    pub fn cuts(&self) -> (usize, usize, usize, usize) {
        self.cuts
    }

    pub fn validated_k(&self) -> usize {
        self.validated_k
    }

    fn part(&self, lo: usize, hi: usize) -> String {
        self.seed[lo..hi].iter().collect()
    }

    pub fn u(&self) -> String {
        self.part(0, self.cuts.0)
    }

    pub fn x(&self) -> String {
        self.part(self.cuts.0, self.cuts.1)
    }

    pub fn z(&self) -> String {
        self.part(self.cuts.1, self.cuts.2)
    }

    pub fn y(&self) -> String {
        self.part(self.cuts.2, self.cuts.3)
    }

    pub fn v(&self) -> String {
        self.part(self.cuts.3, self.seed.len())
    }

    /// Character range of x within the seed.
    pub fn x_range(&self) -> std::ops::Range<usize> {
        self.cuts.0..self.cuts.1
    }

    /// Character range of y within the seed.
    pub fn y_range(&self) -> std::ops::Range<usize> {
        self.cuts.2..self.cuts.3
    }

    /// Builds u x^k z y^j v.
    pub fn pump(&self, k: usize, j: usize) -> String {
        let mut out = String::with_capacity(self.seed.len() + (k + j) * 8);
        out.push_str(&self.u());
        let x = self.x();
        for _ in 0..k {
            out.push_str(&x);
        }
        out.push_str(&self.z());
        let y = self.y();
        for _ in 0..j {
            out.push_str(&y);
        }
        out.push_str(&self.v());
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NestingLimits {
    /// Upper bound on |x| and |y| when enumerating partitions.
    pub max_frag: usize,
}

impl Default for NestingLimits {
    fn default() -> Self {
        NestingLimits { max_frag: 8 }
    }
}

/// Validates one partitioning against the pumping grid: u x^k z y^k v must be
/// accepted for all k <= bound and u x^k z y^j v rejected for all k != j up
/// to the bound. The cheapest rejection (x pumped alone) is probed first.
fn validate_pattern(oracle: &CachedOracle, pattern: &NestingPattern, bound: usize) -> Result<bool> {
    if oracle.query(&pattern.pump(2, 1))? {
        return Ok(false);
    }
    for k in 1..=bound {
        if !oracle.query(&pattern.pump(k, k))? {
            return Ok(false);
        }
    }
    for k in 0..=bound {
        for j in 0..=bound {
            if k != j && oracle.query(&pattern.pump(k, j))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Enumerates every partitioning of every seed within the fragment limits
/// and keeps those passing the pumping grid at the given bound. Result order
/// is canonical: (seed index, |u|, |x|, |z|, |y|) ascending.
pub fn candidate_nesting(
    oracle: &CachedOracle,
    seeds: &[String],
    bound: usize,
    limits: NestingLimits,
) -> Result<Vec<NestingPattern>> {
    if bound < 2 {
        return Err(Error::Config("pumping bound must be at least 2".into()));
    }
    let mut out = Vec::new();
    for seed in seeds {
        let n = seed.chars().count();
        for i1 in 0..n {
            for x_len in 1..=limits.max_frag.min(n - i1) {
                let i2 = i1 + x_len;
                if i2 >= n {
                    break; // y needs at least one character after x
                }
                for i3 in i2..n {
                    for y_len in 1..=limits.max_frag.min(n - i3) {
                        let i4 = i3 + y_len;
                        let pattern = NestingPattern::new(seed, (i1, i2, i3, i4), bound);
                        if validate_pattern(oracle, &pattern, bound)? {
                            out.push(pattern);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// True iff replacing s[i..=j] (1-based, inclusive) by its k-fold repetition
/// keeps the string in the language.
pub fn is_k_repeatable(
    oracle: &CachedOracle,
    s: &str,
    span: (usize, usize),
    k: usize,
) -> Result<bool> {
    let chars: Vec<char> = s.chars().collect();
    let (i, j) = span;
    if i < 1 || j < i || j > chars.len() {
        return Err(Error::Config(format!(
            "span ({i},{j}) out of range for string of length {}",
            chars.len()
        )));
    }
    let prefix: String = chars[..i - 1].iter().collect();
    let body: String = chars[i - 1..j].iter().collect();
    let suffix: String = chars[j..].iter().collect();
    let mut candidate = prefix;
    for _ in 0..k {
        candidate.push_str(&body);
    }
    candidate.push_str(&suffix);
    oracle.query(&candidate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pump_rebuilds_seed_at_one_one() {
        let p = NestingPattern::new("agcdcdhbcd", (0, 2, 6, 8), 2);
        assert_eq!(p.u(), "");
        assert_eq!(p.x(), "ag");
        assert_eq!(p.z(), "cdcd");
        assert_eq!(p.y(), "hb");
        assert_eq!(p.v(), "cd");
        assert_eq!(p.pump(1, 1), "agcdcdhbcd");
        assert_eq!(p.pump(2, 2), "agagcdcdhbhbcd");
        assert_eq!(p.pump(2, 1), "agagcdcdhbcd");
        assert_eq!(p.pump(0, 0), "cdcdcd");
    }

    #[test]
    fn k_repeatable_identity_at_one() {
        let oracle = CachedOracle::from_fn(|s: &str| s == "abc");
        assert!(is_k_repeatable(&oracle, "abc", (1, 3), 1).unwrap());
        assert!(!is_k_repeatable(&oracle, "abc", (2, 2), 2).unwrap());
    }

    #[test]
    fn span_bounds_are_checked() {
        let oracle = CachedOracle::from_fn(|_| true);
        assert!(is_k_repeatable(&oracle, "abc", (0, 2), 2).is_err());
        assert!(is_k_repeatable(&oracle, "abc", (2, 5), 2).is_err());
    }
}
