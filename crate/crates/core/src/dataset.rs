//! Conversation corpus, pipeline configuration, and dataset splitting.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::MatchConfig;
use crate::pipeline::PatientSelfReport;
use crate::tokens::DEFAULT_SEPARATOR;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("need at least 3 conversations to split, got {0}")]
    TooFewConversations(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub patient_question: String,
    pub doctor_response: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    #[serde(default)]
    pub self_report: PatientSelfReport,
    pub turns: Vec<Turn>,
}

impl Conversation {
    pub fn validate(&self) -> Result<(), String> {
        if self.turns.is_empty() {
            return Err("conversation has no turns".into());
        }
        if let Some(i) = self.turns.iter().position(|t| t.patient_question.trim().is_empty()) {
            return Err(format!("turn {} has an empty patient question", i + 1));
        }
        Ok(())
    }
}

/// Parses a JSON-lines corpus: one conversation object per non-blank line.
pub fn parse_corpus(text: &str) -> Result<Vec<Conversation>, DataError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| DataError::Corpus { line: i + 1, message };
        let conv: Conversation = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        conv.validate().map_err(err)?;
        out.push(conv);
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Conversation>, DataError> {
    parse_corpus(&read_file(path.as_ref())?)
}

pub fn corpus_to_jsonl(convs: &[Conversation]) -> String {
    convs
        .iter()
        .map(|c| serde_json::to_string(c).expect("conversation serializes") + "\n")
        .collect()
}

pub(crate) fn read_file(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(rename = "match")]
    pub matching: MatchConfig,
    pub separator: String,
    pub smoothing_k: f64,
    pub max_len: usize,
    pub seed: u64,
    /// Train, validation, test.
    pub split: [f64; 3],
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            matching: MatchConfig::default(),
            separator: DEFAULT_SEPARATOR.to_string(),
            smoothing_k: 0.01,
            max_len: 32,
            seed: 42,
            split: [0.8, 0.1, 0.1],
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        self.matching
            .validate()
            .map_err(|e| DataError::Config(e.to_string()))?;
        if self.split.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(DataError::Config("split ratios must be positive".into()));
        }
        let sum: f64 = self.split.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DataError::Config(format!("split ratios sum to {sum}, expected 1")));
        }
        if !(self.smoothing_k.is_finite() && self.smoothing_k > 0.0) {
            return Err(DataError::Config("smoothing_k must be positive".into()));
        }
        if self.max_len == 0 {
            return Err(DataError::Config("max_len must be at least 1".into()));
        }
        if self.separator.is_empty() || self.separator.chars().any(char::is_whitespace) {
            return Err(DataError::Config("separator must be a single non-blank token".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| DataError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::from_toml(&read_file(path.as_ref())?)
    }
}

/// Partition sizes for `n` items: validation and test each get
/// `max(1, floor(ratio * n))`, train takes the remainder.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> Result<(usize, usize, usize), DataError> {
    if n < 3 {
        return Err(DataError::TooFewConversations(n));
    }
    let part = |r: f64| ((r * n as f64 + 1e-9).floor() as usize).max(1);
    let (val, test) = (part(ratios[1]), part(ratios[2]));
    if val + test >= n {
        // Degenerate ratios on tiny corpora; keep every partition non-empty.
        let test = 1;
        let val = (n - 2).min(val.max(1));
        return Ok((n - val - test, val, test));
    }
    Ok((n - val - test, val, test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle followed by a contiguous train / validation / test cut.
pub fn split_dataset<T: Clone>(items: &[T], cfg: &PipelineConfig) -> Result<Split<T>, DataError> {
    let (n_train, n_val, _) = split_sizes(items.len(), cfg.split)?;
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    Ok(Split {
        train: pick(&order[..n_train]),
        validation: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
    })
}
