use std::collections::BTreeMap;
use std::io::{self, Write};

use super::{
    sorted_vocab, write_header, Distribution, GenerationError, Generator, TrainingExample,
    END_TOKEN,
};
use crate::dataset::Conversation;
use crate::matching::{combined_dist, MatchConfig};
use crate::tokens::{tokenize, ModelInput};

/// Probability mass spread uniformly over the vocabulary so that tokens
/// outside the retrieved response keep a non-zero likelihood.
pub const DEFAULT_RETRIEVAL_FLOOR: f64 = 0.01;

/// Nearest-question lookup over stored (question, response) pairs.
///
/// Questions are compared as space-joined token strings with pure
/// Levenshtein weighting, whatever the pipeline's match weights are, so a
/// stored question is always retrieved for itself. Earlier pairs win ties.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalBaseline {
    pairs: Vec<(String, Vec<String>)>,
    floor: f64,
    vocab: Vec<String>,
}

impl RetrievalBaseline {
    pub fn new(pairs: Vec<(String, Vec<String>)>, floor: f64) -> Result<Self, GenerationError> {
        if pairs.is_empty() {
            return Err(GenerationError::EmptyCorpus);
        }
        if !(floor > 0.0 && floor < 1.0) {
            return Err(GenerationError::InvalidParameter(format!(
                "retrieval floor must lie in (0, 1), got {floor}"
            )));
        }
        let vocab = sorted_vocab(pairs.iter().flat_map(|(_, r)| r.iter()));
        Ok(RetrievalBaseline { pairs, floor, vocab })
    }

    pub fn train(examples: &[TrainingExample], floor: f64) -> Result<Self, GenerationError> {
        let pairs = examples
            .iter()
            .map(|e| (e.input.patient_question().join(" "), e.response.clone()))
            .collect();
        Self::new(pairs, floor)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, Vec<String>)] {
        &self.pairs
    }

    /// Response of the stored question closest to `question_tokens`.
    pub fn retrieve(&self, question_tokens: &[String]) -> &[String] {
        let query = question_tokens.join(" ");
        let c = MatchConfig::levenshtein_only();
        let mut best = (f64::INFINITY, 0);
        for (i, (q, _)) in self.pairs.iter().enumerate() {
            let d = combined_dist(&query, q, &c);
            if d < best.0 {
                best = (d, i);
            }
        }
        &self.pairs[best.1].1
    }

    pub(crate) fn load(params: &BTreeMap<String, String>, body: &[(usize, &str)]) -> Result<Self, GenerationError> {
        let floor = match params.get("floor") {
            Some(v) => v
                .parse()
                .map_err(|e| GenerationError::Format { line: 1, message: format!("bad floor: {e}") })?,
            None => DEFAULT_RETRIEVAL_FLOOR,
        };
        let mut pairs = Vec::new();
        for &(line, text) in body {
            match text.split('\t').collect::<Vec<_>>().as_slice() {
                ["pair", q, r] => pairs.push((
                    q.to_string(),
                    r.split(' ').filter(|t| !t.is_empty()).map(String::from).collect(),
                )),
                _ => {
                    return Err(GenerationError::Format {
                        line,
                        message: "expected a pair record".into(),
                    })
                }
            }
        }
        Self::new(pairs, floor)
    }
}

/// Stores every (patient question, doctor response) turn of the corpus.
pub fn train_retrieval(corpus: &[Conversation]) -> Result<RetrievalBaseline, GenerationError> {
    let pairs = corpus
        .iter()
        .flat_map(|c| c.turns.iter())
        .map(|t| (tokenize(&t.patient_question).join(" "), tokenize(&t.doctor_response)))
        .collect();
    RetrievalBaseline::new(pairs, DEFAULT_RETRIEVAL_FLOOR)
}

impl Generator for RetrievalBaseline {
    fn kind(&self) -> &'static str {
        "retrieval"
    }

    fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    /// Mass `1 - floor` on the retrieved response's token at this position
    /// (the end token once the response is exhausted), the rest uniform.
    fn next_token_distribution(&self, x: &ModelInput, prefix: &[String]) -> Distribution {
        let response = self.retrieve(x.patient_question());
        let target = response.get(prefix.len()).map_or(END_TOKEN, String::as_str);
        let base = self.floor / self.vocab.len() as f64;
        self.vocab
            .iter()
            .map(|t| {
                let p = if t == target { base + 1.0 - self.floor } else { base };
                (t.clone(), p)
            })
            .collect()
    }

    fn generate(&self, x: &ModelInput, max_len: usize) -> Vec<String> {
        self.retrieve(x.patient_question())
            .iter()
            .cloned()
            .chain([END_TOKEN.to_string()])
            .take(max_len)
            .collect()
    }

    fn save(&self, w: &mut dyn Write) -> io::Result<()> {
        write_header(w, self.kind(), &[("floor", self.floor.to_string())])?;
        for (q, r) in &self.pairs {
            writeln!(w, "pair\t{q}\t{}", r.join(" "))?;
        }
        Ok(())
    }
}
