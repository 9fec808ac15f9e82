use std::io::{self, Write};

use super::{sorted_vocab, write_header, Distribution, Generator};
use crate::tokens::ModelInput;

/// Assigns the same probability to every outcome. A context-free reference
/// point: its perplexity equals the vocabulary size.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGenerator {
    vocab: Vec<String>,
}

impl UniformGenerator {
    /// `tokens` are the content tokens; end and unknown are added.
    pub fn new(tokens: Vec<String>) -> Self {
        UniformGenerator {
            vocab: sorted_vocab(&tokens),
        }
    }

    /// Uses `vocab` verbatim as the outcome set.
    pub fn with_exact_vocabulary(mut vocab: Vec<String>) -> Self {
        vocab.sort();
        vocab.dedup();
        UniformGenerator { vocab }
    }
}

impl Generator for UniformGenerator {
    fn kind(&self) -> &'static str {
        "uniform"
    }

    fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    fn next_token_distribution(&self, _x: &ModelInput, _prefix: &[String]) -> Distribution {
        let p = 1.0 / self.vocab.len() as f64;
        self.vocab.iter().map(|t| (t.clone(), p)).collect()
    }

    fn token_probability(&self, _x: &ModelInput, _prefix: &[String], _token: &str) -> f64 {
        1.0 / self.vocab.len() as f64
    }

    fn save(&self, w: &mut dyn Write) -> io::Result<()> {
        write_header(w, self.kind(), &[])?;
        for t in &self.vocab {
            writeln!(w, "vocab\t{t}")?;
        }
        Ok(())
    }
}
