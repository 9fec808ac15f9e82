//! Hybrid edit distance and argmin entity matching.
//!
//! All distances work on Unicode scalar values of whole strings, so a
//! Chinese character counts as one position.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Entity;

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("similarity is undefined for two empty strings")]
    BothEmpty,
    #[error("no candidates to match against")]
    EmptyCandidateSet,
    #[error("invalid match config: {0}")]
    InvalidConfig(String),
}

/// Weights of the combined distance plus the topic-similarity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    /// Levenshtein weight.
    pub alpha: f64,
    /// Hamming weight. Negative values are allowed.
    pub beta: f64,
    /// Similarity threshold used by topic detection.
    pub delta: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            alpha: 0.1,
            beta: -1.0,
            delta: 0.7,
        }
    }
}

impl MatchConfig {
    pub fn new(alpha: f64, beta: f64, delta: f64) -> Result<Self, MatchError> {
        let c = MatchConfig { alpha, beta, delta };
        c.validate()?;
        Ok(c)
    }

    /// Pure Levenshtein weighting; exact matches always win.
    pub fn levenshtein_only() -> Self {
        MatchConfig {
            alpha: 1.0,
            beta: 0.0,
            delta: 0.7,
        }
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(MatchError::InvalidConfig("alpha and beta must be finite".into()));
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(MatchError::InvalidConfig(
                "alpha and beta cannot both be zero".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(MatchError::InvalidConfig(format!(
                "delta must lie in [0, 1], got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

pub fn levenshtein(u: &str, v: &str) -> usize {
    let a: Vec<char> = u.chars().collect();
    let b: Vec<char> = v.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ac) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &bc) in b.iter().enumerate() {
            let cost = usize::from(ac != bc);
            cur[j + 1] = (cur[j] + 1).min(prev[j + 1] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Positional mismatches over the common prefix length plus the length gap.
pub fn hamming_ext(u: &str, v: &str) -> usize {
    let a: Vec<char> = u.chars().collect();
    let b: Vec<char> = v.chars().collect();
    hamming_chars(&a, &b)
}

pub(crate) fn hamming_chars(a: &[char], b: &[char]) -> usize {
    let mismatches = a.iter().zip(b).filter(|(x, y)| x != y).count();
    mismatches + a.len().abs_diff(b.len())
}

/// `alpha * levenshtein + beta * hamming_ext`. Negative when `beta < 0`
/// dominates.
pub fn combined_dist(u: &str, v: &str, c: &MatchConfig) -> f64 {
    let a: Vec<char> = u.chars().collect();
    let b: Vec<char> = v.chars().collect();
    combined_chars(&a, &b, c)
}

fn combined_chars(a: &[char], b: &[char], c: &MatchConfig) -> f64 {
    c.alpha * levenshtein_chars(a, b) as f64 + c.beta * hamming_chars(a, b) as f64
}

/// Length-normalised similarity in `[0, 1]`, using the absolute weights
/// rescaled to sum to one. Equals 1 exactly when `u == v`.
pub fn normalized_similarity(u: &str, v: &str, c: &MatchConfig) -> Result<f64, MatchError> {
    let a: Vec<char> = u.chars().collect();
    let b: Vec<char> = v.chars().collect();
    similarity_chars(&a, &b, c)
}

pub(crate) fn similarity_chars(a: &[char], b: &[char], c: &MatchConfig) -> Result<f64, MatchError> {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return Err(MatchError::BothEmpty);
    }
    let total = c.alpha.abs() + c.beta.abs();
    let (wl, wh) = (c.alpha.abs() / total, c.beta.abs() / total);
    let d = wl * levenshtein_chars(a, b) as f64 + wh * hamming_chars(a, b) as f64;
    Ok((1.0 - d / longest as f64).clamp(0.0, 1.0))
}

/// Candidate with the smallest combined distance to `query`. Ties go to the
/// lexicographically smaller name, then to the earlier entity type.
pub fn best_match<'a>(
    query: &str,
    candidates: impl IntoIterator<Item = &'a Entity>,
    c: &MatchConfig,
) -> Result<&'a Entity, MatchError> {
    let q: Vec<char> = query.chars().collect();
    let mut best: Option<(f64, &Entity)> = None;
    for cand in candidates {
        let name: Vec<char> = cand.name.chars().collect();
        let d = combined_chars(&q, &name, c);
        best = match best {
            Some((bd, be)) if bd < d || (bd == d && be <= cand) => Some((bd, be)),
            _ => Some((d, cand)),
        };
    }
    best.map(|(_, e)| e).ok_or(MatchError::EmptyCandidateSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EntityType;

    /// Full-table edit distance, kept independent of the two-row version.
    fn lev_table(u: &str, v: &str) -> usize {
        let a: Vec<char> = u.chars().collect();
        let b: Vec<char> = v.chars().collect();
        let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in t.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            t[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
            }
        }
        t[a.len()][b.len()]
    }

    fn defaults() -> MatchConfig {
        MatchConfig::default()
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("angina", "angina"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(lev_table("kitten", "sitting"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("心绞痛", "心律失常"), 3);
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_ext("abc", "abc"), 0);
        assert_eq!(hamming_ext("abc", "ab"), 1);
        assert_eq!(hamming_ext("karolin", "kathrin"), 3);
    }

    #[test]
    fn combined_examples() {
        assert_eq!(combined_dist("angina", "angina", &defaults()), 0.0);
        assert!((combined_dist("angina", "angima", &defaults()) - (-0.9)).abs() < 1e-12);
        let ones = MatchConfig::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(combined_dist("abc", "", &ones), 6.0);
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(normalized_similarity("fever", "fever", &defaults()).unwrap(), 1.0);
        assert_eq!(normalized_similarity("ab", "cd", &defaults()).unwrap(), 0.0);
        assert_eq!(normalized_similarity("", "", &defaults()), Err(MatchError::BothEmpty));
    }

    #[test]
    fn medicine_misspelling_similarity() {
        // Oracle: Lev = 1; positional mismatches m,e,d agree then 4 differ,
        // plus a length gap of 1, so Ham = 5. Longest = 8.
        assert_eq!(lev_table("medicine", "medcine"), 1);
        assert_eq!(hamming_ext("medicine", "medcine"), 5);
        let lev_only = MatchConfig::levenshtein_only();
        let s = normalized_similarity("medicine", "medcine", &lev_only).unwrap();
        assert!((s - 0.875).abs() < 1e-12);
        assert!(s > 0.7);
        // Hamming-dominated default weights: 1 - (0.1 + 5) / 1.1 / 8.
        let s = normalized_similarity("medicine", "medcine", &defaults()).unwrap();
        assert!((s - (1.0 - 5.1 / 1.1 / 8.0)).abs() < 1e-12);
        assert!(s < 0.7);
    }

    #[test]
    fn config_validation() {
        assert!(MatchConfig::new(0.1, -1.0, 0.7).is_ok());
        assert!(MatchConfig::new(0.1, -1.0, 1.5).is_err());
        assert!(MatchConfig::new(f64::NAN, -1.0, 0.5).is_err());
        assert!(MatchConfig::new(0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn best_match_examples() {
        let card = Entity::new("cardiology", EntityType::Department);
        assert_eq!(best_match("cardiology", [&card], &defaults()).unwrap(), &card);

        let angina = Entity::new("angina", EntityType::Disease);
        let arr = Entity::new("arrhythmia", EntityType::Disease);
        let cands = [angina.clone(), arr.clone()];
        let lev = MatchConfig::new(1.0, 0.0, 0.7).unwrap();
        assert_eq!(best_match("angina", &cands, &lev).unwrap(), &angina);

        // Exhaustive oracle under the default weights.
        let da = combined_dist("anginaa", "angina", &defaults());
        let dr = combined_dist("anginaa", "arrhythmia", &defaults());
        let expect = if da < dr || (da == dr && angina < arr) { &angina } else { &arr };
        assert_eq!(best_match("anginaa", &cands, &defaults()).unwrap(), expect);

        assert_eq!(
            best_match("x", std::iter::empty::<&Entity>(), &defaults()),
            Err(MatchError::EmptyCandidateSet)
        );
    }

    #[test]
    fn ties_prefer_name_then_type() {
        let s = Entity::new("fever", EntityType::Symptom);
        let d = Entity::new("fever", EntityType::Disease);
        assert_eq!(best_match("fever", [&s, &d], &defaults()).unwrap(), &d);
        let a = Entity::new("ab", EntityType::Disease);
        let b = Entity::new("aa", EntityType::Disease);
        // Both differ from "ac" by one substitution.
        assert_eq!(best_match("ac", [&a, &b], &defaults()).unwrap(), &b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn text() -> impl Strategy<Value = String> {
            proptest::collection::vec(prop_oneof![Just('a'), Just('b'), Just('c'), Just('病'), Just('é')], 0..12)
                .prop_map(|v| v.into_iter().collect())
        }

        proptest! {
            #[test]
            fn lev_matches_table(u in text(), v in text()) {
                prop_assert_eq!(levenshtein(&u, &v), lev_table(&u, &v));
            }

            #[test]
            fn metric_axioms(u in text(), v in text(), w in text()) {
                prop_assert_eq!(levenshtein(&u, &v), levenshtein(&v, &u));
                prop_assert_eq!(hamming_ext(&u, &v), hamming_ext(&v, &u));
                prop_assert_eq!(levenshtein(&u, &v) == 0, u == v);
                prop_assert_eq!(hamming_ext(&u, &v) == 0, u == v);
                prop_assert!(levenshtein(&u, &w) <= levenshtein(&u, &v) + levenshtein(&v, &w));
                prop_assert!(levenshtein(&u, &v) <= hamming_ext(&u, &v));
            }

            #[test]
            fn similarity_bounded(u in text(), v in text(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
                prop_assume!(a != 0.0 || b != 0.0);
                prop_assume!(!(u.is_empty() && v.is_empty()));
                let c = MatchConfig { alpha: a, beta: b, delta: 0.5 };
                let s = normalized_similarity(&u, &v, &c).unwrap();
                prop_assert!((0.0..=1.0).contains(&s));
                prop_assert_eq!(s == 1.0, u == v);
            }

            #[test]
            fn positive_weights_recover_query(q in text(), others in proptest::collection::vec(text(), 0..6),
                                              a in 0.01f64..2.0, b in 0.0f64..2.0) {
                let c = MatchConfig { alpha: a, beta: b, delta: 0.5 };
                let mut cands: Vec<Entity> = others.into_iter().map(|n| Entity::new(n, EntityType::Disease)).collect();
                cands.push(Entity::new(q.clone(), EntityType::Disease));
                prop_assert_eq!(&best_match(&q, &cands, &c).unwrap().name, &q);
            }
        }
    }
}
