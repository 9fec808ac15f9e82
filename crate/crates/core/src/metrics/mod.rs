//! Automatic evaluation: perplexity, BLEU-2/4, NIST-2/4, METEOR,
//! Entropy-4 and Dist-1/2.

mod diversity;
mod overlap;

pub use diversity::{dist_n, entropy_n};
pub use overlap::{bleu_n, meteor, nist_beta, nist_n};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::generation::{sequence_log_likelihood, Generator};
use crate::tokens::ModelInput;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("candidate is empty")]
    EmptyCandidate,
    #[error("n-gram order must be at least 1")]
    InvalidOrder,
    #[error("no {0}-grams in the responses")]
    NoNgrams(usize),
    #[error("aligned lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("metric report: {0}")]
    Report(String),
}

pub(crate) fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut counts = BTreeMap::new();
    if n > 0 {
        for g in tokens.windows(n) {
            *counts.entry(g).or_default() += 1;
        }
    }
    counts
}

/// `exp(-sum(log-likelihood) / sum(reference length))` over all pairs.
/// Empty references contribute nothing.
pub fn perplexity<'a, I>(pairs: I, g: &dyn Generator) -> Result<f64, MetricError>
where
    I: IntoIterator<Item = (&'a ModelInput, &'a [String])>,
{
    let mut ll = 0.0;
    let mut count = 0usize;
    for (x, y) in pairs {
        if y.is_empty() {
            continue;
        }
        ll += sequence_log_likelihood(x, y, g).expect("non-empty target");
        count += y.len();
    }
    if count == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok((-ll / count as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub perplexity: f64,
    pub bleu2: f64,
    pub bleu4: f64,
    pub nist2: f64,
    pub nist4: f64,
    pub meteor: f64,
    pub entropy4: f64,
    pub dist1: f64,
    pub dist2: f64,
}

impl MetricReport {
    const KEYS: [&'static str; 9] = [
        "perplexity", "bleu2", "bleu4", "nist2", "nist4", "meteor", "entropy4", "dist1", "dist2",
    ];

    fn values(&self) -> [f64; 9] {
        [
            self.perplexity,
            self.bleu2,
            self.bleu4,
            self.nist2,
            self.nist4,
            self.meteor,
            self.entropy4,
            self.dist1,
            self.dist2,
        ]
    }

    /// Checks finiteness and the declared range of every field.
    pub fn check_ranges(&self) -> Result<(), String> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let checks = [
            ("perplexity", self.perplexity >= 1.0),
            ("bleu2", unit(self.bleu2)),
            ("bleu4", unit(self.bleu4)),
            ("nist2", self.nist2 >= 0.0),
            ("nist4", self.nist4 >= 0.0),
            ("meteor", unit(self.meteor)),
            ("entropy4", self.entropy4 >= 0.0),
            ("dist1", unit(self.dist1)),
            ("dist2", unit(self.dist2)),
        ];
        for ((name, ok), v) in checks.into_iter().zip(self.values()) {
            if !v.is_finite() || !ok {
                return Err(format!("{name} out of range: {v}"));
            }
        }
        Ok(())
    }

    /// Parses the `key = value` form written by `Display`.
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let mut vals: HashMap<&str, f64> = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| MetricError::Report(format!("malformed line {line:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| MetricError::Report(format!("{}: {e}", k.trim())))?;
            vals.insert(k.trim(), v);
        }
        let get = |k: &str| vals.get(k).copied().ok_or_else(|| MetricError::Report(format!("missing {k}")));
        Ok(MetricReport {
            perplexity: get("perplexity")?,
            bleu2: get("bleu2")?,
            bleu4: get("bleu4")?,
            nist2: get("nist2")?,
            nist4: get("nist4")?,
            meteor: get("meteor")?,
            entropy4: get("entropy4")?,
            dist1: get("dist1")?,
            dist2: get("dist2")?,
        })
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in Self::KEYS.iter().zip(self.values()) {
            writeln!(f, "{k} = {v:.6}")?;
        }
        Ok(())
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn or_zero(r: Result<f64, MetricError>) -> Result<f64, MetricError> {
    match r {
        Err(MetricError::NoNgrams(_)) => Ok(0.0),
        other => other,
    }
}

/// Scores a test run. BLEU and METEOR are sentence-level then averaged
/// (an empty candidate scores 0); NIST, Entropy and Dist are corpus-level,
/// with Entropy/Dist reported as 0 when the candidates hold no n-grams of
/// the required order. Perplexity scores the references under `g`.
pub fn evaluate_corpus(
    candidates: &[Vec<String>],
    references: &[Vec<String>],
    inputs: &[ModelInput],
    g: &dyn Generator,
) -> Result<MetricReport, MetricError> {
    if candidates.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch(candidates.len(), references.len()));
    }
    if inputs.len() != references.len() {
        return Err(MetricError::LengthMismatch(inputs.len(), references.len()));
    }
    let sentence_bleu = |n: usize| {
        mean(
            candidates
                .iter()
                .zip(references)
                .map(|(c, r)| bleu_n(c, r, n).unwrap_or(0.0)),
        )
    };
    Ok(MetricReport {
        perplexity: perplexity(inputs.iter().zip(references.iter().map(Vec::as_slice)), g)?,
        bleu2: sentence_bleu(2),
        bleu4: sentence_bleu(4),
        nist2: nist_n(candidates, references, 2)?,
        nist4: nist_n(candidates, references, 4)?,
        meteor: mean(candidates.iter().zip(references).map(|(c, r)| meteor(c, r))),
        entropy4: or_zero(entropy_n(candidates, 4))?,
        dist1: or_zero(dist_n(candidates, 1))?,
        dist2: or_zero(dist_n(candidates, 2))?,
    })
}
