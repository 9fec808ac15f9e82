//! Lexical diversity of generated responses, pooled over the corpus.

use std::collections::BTreeMap;

use super::MetricError;

fn pooled(responses: &[Vec<String>], n: usize) -> Result<BTreeMap<&[String], usize>, MetricError> {
    if n == 0 {
        return Err(MetricError::InvalidOrder);
    }
    let mut counts: BTreeMap<&[String], usize> = BTreeMap::new();
    for r in responses {
        for g in r.windows(n) {
            *counts.entry(g).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(MetricError::NoNgrams(n));
    }
    Ok(counts)
}

/// Shannon entropy (nats) of the empirical n-gram distribution.
pub fn entropy_n(responses: &[Vec<String>], n: usize) -> Result<f64, MetricError> {
    let counts = pooled(responses, n)?;
    let total: usize = counts.values().sum();
    let h: f64 = counts
        .into_values()
        .map(|c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum();
    Ok(h.max(0.0))
}

/// Distinct n-grams over total n-grams.
pub fn dist_n(responses: &[Vec<String>], n: usize) -> Result<f64, MetricError> {
    let counts = pooled(responses, n)?;
    let total: usize = counts.values().sum();
    Ok(counts.len() as f64 / total as f64)
}
