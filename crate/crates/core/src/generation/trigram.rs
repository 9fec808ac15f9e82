use std::collections::BTreeMap;
use std::io::{self, Write};

use super::{
    sorted_vocab, write_header, Distribution, GenerationError, Generator, TrainingExample,
    BOS_TOKEN, END_TOKEN, UNK_TOKEN,
};
use crate::tokens::ModelInput;

type History = (String, String);

/// Add-k smoothed trigram model over response tokens.
///
/// Each training sequence is `<s> <s> input... response... </s>`; only
/// trigrams whose predicted token lies in the response (or is the end
/// token) are counted, so the input acts purely as conditioning context.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigramBaseline {
    k: f64,
    vocab: Vec<String>,
    counts: BTreeMap<History, BTreeMap<String, u64>>,
    totals: BTreeMap<History, u64>,
}

impl TrigramBaseline {
    pub fn train(examples: &[TrainingExample], k: f64) -> Result<Self, GenerationError> {
        if examples.is_empty() {
            return Err(GenerationError::EmptyCorpus);
        }
        let pairs: Vec<(&[String], &[String])> = examples
            .iter()
            .map(|e| (e.input.flat(), e.response.as_slice()))
            .collect();
        Self::train_sequences(&pairs, k)
    }

    /// Trains from raw `(context, response)` token pairs.
    pub fn train_sequences(pairs: &[(&[String], &[String])], k: f64) -> Result<Self, GenerationError> {
        if pairs.is_empty() {
            return Err(GenerationError::EmptyCorpus);
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(GenerationError::InvalidParameter(format!(
                "smoothing constant must be positive, got {k}"
            )));
        }
        let mut counts: BTreeMap<History, BTreeMap<String, u64>> = BTreeMap::new();
        for (context, response) in pairs {
            let mut seq: Vec<&str> = vec![BOS_TOKEN, BOS_TOKEN];
            seq.extend(context.iter().map(String::as_str));
            let start = seq.len();
            seq.extend(response.iter().map(String::as_str));
            seq.push(END_TOKEN);
            for t in start..seq.len() {
                *counts
                    .entry((seq[t - 2].to_string(), seq[t - 1].to_string()))
                    .or_default()
                    .entry(seq[t].to_string())
                    .or_default() += 1;
            }
        }
        let vocab = sorted_vocab(pairs.iter().flat_map(|(_, r)| r.iter()));
        Ok(Self::from_parts(k, vocab, counts))
    }

    fn from_parts(k: f64, vocab: Vec<String>, counts: BTreeMap<History, BTreeMap<String, u64>>) -> Self {
        let totals = counts
            .iter()
            .map(|(h, next)| (h.clone(), next.values().sum()))
            .collect();
        TrigramBaseline {
            k,
            vocab,
            counts,
            totals,
        }
    }

    pub fn smoothing(&self) -> f64 {
        self.k
    }

    pub fn count(&self, u: &str, v: &str, w: &str) -> u64 {
        self.counts
            .get(&(u.to_string(), v.to_string()))
            .and_then(|m| m.get(w))
            .copied()
            .unwrap_or(0)
    }

    pub fn history_count(&self, u: &str, v: &str) -> u64 {
        self.totals
            .get(&(u.to_string(), v.to_string()))
            .copied()
            .unwrap_or(0)
    }

    fn history(x: &ModelInput, prefix: &[String]) -> History {
        let tail: Vec<&str> = [BOS_TOKEN, BOS_TOKEN]
            .into_iter()
            .chain(x.flat().iter().map(String::as_str))
            .chain(prefix.iter().map(String::as_str))
            .collect();
        let n = tail.len();
        (tail[n - 2].to_string(), tail[n - 1].to_string())
    }

    fn prob(&self, h: &History, count: u64) -> f64 {
        let total = self.totals.get(h).copied().unwrap_or(0) as f64;
        (count as f64 + self.k) / (total + self.k * self.vocab.len() as f64)
    }

    pub(crate) fn load(params: &BTreeMap<String, String>, body: &[(usize, &str)]) -> Result<Self, GenerationError> {
        let k: f64 = params
            .get("k")
            .ok_or_else(|| GenerationError::Format { line: 1, message: "missing k".into() })?
            .parse()
            .map_err(|e| GenerationError::Format { line: 1, message: format!("bad k: {e}") })?;
        let mut vocab = Vec::new();
        let mut counts: BTreeMap<History, BTreeMap<String, u64>> = BTreeMap::new();
        for &(line, text) in body {
            let f: Vec<&str> = text.split('\t').collect();
            let bad = |m: &str| GenerationError::Format { line, message: m.to_string() };
            match f.as_slice() {
                ["vocab", tok] => vocab.push(tok.to_string()),
                ["count", u, v, w, n] => {
                    let n: u64 = n.parse().map_err(|_| bad("bad count"))?;
                    counts
                        .entry((u.to_string(), v.to_string()))
                        .or_default()
                        .insert(w.to_string(), n);
                }
                _ => return Err(bad("expected a vocab or count record")),
            }
        }
        if !vocab.iter().any(|t| t == END_TOKEN) || !vocab.iter().any(|t| t == UNK_TOKEN) {
            return Err(GenerationError::Format { line: 1, message: "vocabulary lacks end/unknown tokens".into() });
        }
        vocab.sort();
        Ok(Self::from_parts(k, vocab, counts))
    }
}

impl Generator for TrigramBaseline {
    fn kind(&self) -> &'static str {
        "trigram"
    }

    fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    fn next_token_distribution(&self, x: &ModelInput, prefix: &[String]) -> Distribution {
        let h = Self::history(x, prefix);
        let seen = self.counts.get(&h);
        self.vocab
            .iter()
            .map(|w| {
                let c = seen.and_then(|m| m.get(w)).copied().unwrap_or(0);
                (w.clone(), self.prob(&h, c))
            })
            .collect()
    }

    fn token_probability(&self, x: &ModelInput, prefix: &[String], token: &str) -> f64 {
        let h = Self::history(x, prefix);
        let tok = if self.vocab.binary_search_by(|v| v.as_str().cmp(token)).is_ok() {
            token
        } else {
            UNK_TOKEN
        };
        let c = self.counts.get(&h).and_then(|m| m.get(tok)).copied().unwrap_or(0);
        self.prob(&h, c)
    }

    fn save(&self, w: &mut dyn Write) -> io::Result<()> {
        write_header(w, self.kind(), &[("k", self.k.to_string())])?;
        for t in &self.vocab {
            writeln!(w, "vocab\t{t}")?;
        }
        for ((u, v), next) in &self.counts {
            for (tok, n) in next {
                writeln!(w, "count\t{u}\t{v}\t{tok}\t{n}")?;
            }
        }
        Ok(())
    }
}
