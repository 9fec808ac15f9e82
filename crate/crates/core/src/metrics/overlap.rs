//! Reference-overlap metrics: BLEU, NIST and exact-match METEOR.

use std::collections::BTreeMap;

use super::{ngram_counts, MetricError};

/// Sentence BLEU with clipped precisions up to order `n`.
///
/// An order with no clipped match uses `1 / (total + 1)` instead of zero;
/// an order the candidate is too short to have counts as precision 1.
/// Brevity penalty is `min(1, exp(1 - |ref| / |cand|))`.
pub fn bleu_n(candidate: &[String], reference: &[String], n: usize) -> Result<f64, MetricError> {
    if n == 0 {
        return Err(MetricError::InvalidOrder);
    }
    if candidate.is_empty() {
        return Err(MetricError::EmptyCandidate);
    }
    let mut log_sum = 0.0;
    for m in 1..=n {
        let cand = ngram_counts(candidate, m);
        let refc = ngram_counts(reference, m);
        let total: usize = cand.values().sum();
        let matched: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if matched == 0 {
            1.0 / (total as f64 + 1.0)
        } else {
            matched as f64 / total as f64
        };
        log_sum += p.ln();
    }
    let bp = (1.0 - reference.len() as f64 / candidate.len() as f64).exp().min(1.0);
    Ok(bp * (log_sum / n as f64).exp())
}

/// Brevity factor exponent chosen so the factor is 0.5 at a 2/3 length
/// ratio.
pub fn nist_beta() -> f64 {
    0.5f64.ln() / (2.0f64 / 3.0).ln().powi(2)
}

/// Corpus NIST score up to order `n`. Information weights come from the
/// reference side of the corpus itself.
pub fn nist_n(candidates: &[Vec<String>], references: &[Vec<String>], n: usize) -> Result<f64, MetricError> {
    if n == 0 {
        return Err(MetricError::InvalidOrder);
    }
    if candidates.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch(candidates.len(), references.len()));
    }
    let ref_words: usize = references.iter().map(Vec::len).sum();
    let cand_words: usize = candidates.iter().map(Vec::len).sum();

    // Reference-corpus counts for every order up to n.
    let mut corpus: Vec<BTreeMap<&[String], usize>> = vec![BTreeMap::new(); n + 1];
    for r in references {
        for (m, table) in corpus.iter_mut().enumerate().skip(1) {
            for (g, c) in ngram_counts(r, m) {
                *table.entry(g).or_default() += c;
            }
        }
    }
    let info = |g: &[String]| -> f64 {
        let m = g.len();
        let full = corpus[m][g] as f64;
        let prefix = if m == 1 {
            ref_words as f64
        } else {
            corpus[m - 1][&g[..m - 1]] as f64
        };
        (prefix / full).log2()
    };

    let mut score = 0.0;
    for m in 1..=n {
        let mut gained = 0.0;
        let mut total = 0usize;
        for (cand, r) in candidates.iter().zip(references) {
            let cc = ngram_counts(cand, m);
            let rc = ngram_counts(r, m);
            total += cc.values().sum::<usize>();
            for (g, c) in cc {
                let hit = c.min(rc.get(g).copied().unwrap_or(0));
                if hit > 0 {
                    gained += hit as f64 * info(g);
                }
            }
        }
        if total > 0 {
            score += gained / total as f64;
        }
    }
    let ratio = if ref_words == 0 {
        1.0
    } else {
        (cand_words as f64 / ref_words as f64).min(1.0)
    };
    let bf = (nist_beta() * ratio.ln().powi(2)).exp();
    Ok(score * bf)
}

/// Exact-match METEOR: greedy left-to-right unigram alignment, harmonic
/// mean weighted 9:1 toward recall, fragmentation penalty
/// `0.5 * (chunks / matches)^3`.
pub fn meteor(candidate: &[String], reference: &[String]) -> f64 {
    let mut used = vec![false; reference.len()];
    // (candidate index, reference index) in candidate order.
    let mut alignment = Vec::new();
    for (i, tok) in candidate.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && &reference[j] == tok) {
            used[j] = true;
            alignment.push((i, j));
        }
    }
    let matches = alignment.len();
    if matches == 0 {
        return 0.0;
    }
    let chunks = 1 + alignment
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count();
    let p = matches as f64 / candidate.len() as f64;
    let r = matches as f64 / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (chunks as f64 / matches as f64).powi(3);
    fmean * (1.0 - penalty)
}
