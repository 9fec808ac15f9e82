//! Autoregressive generator contract, the baseline generators, and the
//! multi-turn conversation driver.
//!
//! A generator exposes a next-token distribution conditioned on the model
//! input and the response prefix. Sequence likelihood, perplexity, and
//! greedy decoding are all derived from that one method.

mod conversation;
mod registry;
mod retrieval;
mod trigram;
mod uniform;

pub use conversation::{run_conversation, training_examples, ConversationOptions, ConversationRun, TurnTrace};
pub use registry::{GeneratorFactory, GeneratorRegistry, TrainParams};
pub use retrieval::{train_retrieval, RetrievalBaseline};
pub use trigram::TrigramBaseline;
pub use uniform::UniformGenerator;

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::tokens::ModelInput;

pub const END_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";
pub(crate) const BOS_TOKEN: &str = "<s>";

/// Serialized-model header prefix; the version follows.
pub const MODEL_MAGIC: &str = "mka-baseline";
pub const MODEL_VERSION: &str = "v1";

#[derive(Debug, Error, PartialEq)]
pub enum GenerationError {
    #[error("target sequence is empty")]
    EmptyTarget,
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("unknown generator {0:?} (known: {1})")]
    UnknownGenerator(String, String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Probability per outcome token, over the generator's full vocabulary.
pub type Distribution = BTreeMap<String, f64>;

/// One supervised pair: the assembled input and the reference response.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub input: ModelInput,
    pub response: Vec<String>,
}

pub trait Generator: Send + Sync {
    fn kind(&self) -> &'static str;

    /// Outcome tokens in sorted order, always including the end and unknown
    /// tokens.
    fn vocabulary(&self) -> &[String];

    fn next_token_distribution(&self, x: &ModelInput, prefix: &[String]) -> Distribution;

    /// Probability of `token` after `prefix`; out-of-vocabulary tokens are
    /// scored as the unknown token.
    fn token_probability(&self, x: &ModelInput, prefix: &[String], token: &str) -> f64 {
        let dist = self.next_token_distribution(x, prefix);
        dist.get(token)
            .or_else(|| dist.get(UNK_TOKEN))
            .copied()
            .unwrap_or(0.0)
    }

    /// Greedy decoding. Stops after emitting the end token (which is kept)
    /// or after `max_len` tokens.
    fn generate(&self, x: &ModelInput, max_len: usize) -> Vec<String> {
        let mut out = Vec::new();
        while out.len() < max_len {
            let dist = self.next_token_distribution(x, &out);
            let Some(next) = argmax(&dist) else { break };
            let done = next == END_TOKEN;
            out.push(next.to_string());
            if done {
                break;
            }
        }
        out
    }

    fn save(&self, w: &mut dyn Write) -> io::Result<()>;
}

/// Highest-probability token; ties go to the lexicographically first.
pub(crate) fn argmax(dist: &Distribution) -> Option<&str> {
    let mut best: Option<(&str, f64)> = None;
    for (tok, &p) in dist {
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((tok, p));
        }
    }
    best.map(|(t, _)| t)
}

/// Drops a trailing end token.
pub fn strip_end(mut tokens: Vec<String>) -> Vec<String> {
    if tokens.last().is_some_and(|t| t == END_TOKEN) {
        tokens.pop();
    }
    tokens
}

/// Natural-log likelihood of `y` given `x`, factorised left to right.
pub fn sequence_log_likelihood(
    x: &ModelInput,
    y: &[String],
    g: &dyn Generator,
) -> Result<f64, GenerationError> {
    if y.is_empty() {
        return Err(GenerationError::EmptyTarget);
    }
    Ok((0..y.len())
        .map(|t| g.token_probability(x, &y[..t], &y[t]).ln())
        .sum())
}

pub(crate) fn sorted_vocab<'a>(tokens: impl IntoIterator<Item = &'a String>) -> Vec<String> {
    let mut v: Vec<String> = tokens
        .into_iter()
        .cloned()
        .chain([END_TOKEN.to_string(), UNK_TOKEN.to_string()])
        .collect();
    v.sort();
    v.dedup();
    v
}

pub(crate) fn write_header(w: &mut dyn Write, kind: &str, params: &[(&str, String)]) -> io::Result<()> {
    write!(w, "{MODEL_MAGIC} {MODEL_VERSION} kind={kind}")?;
    for (k, v) in params {
        write!(w, " {k}={v}")?;
    }
    writeln!(w)
}
