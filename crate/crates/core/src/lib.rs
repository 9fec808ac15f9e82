//! Knowledge-assisted input preparation and evaluation for medical dialogue
//! generation.
//!
//! The flow per conversation: match the patient self-report against a typed
//! medical knowledge graph and cut a subgraph ([`pipeline::generate_subgraph`]),
//! detect the topics of each patient question ([`pipeline::detect_topics`]),
//! pull the relevant entities ([`pipeline::extract_knowledge`]), assemble the
//! model input ([`tokens::build_model_input`]), and hand it to a
//! [`generation::Generator`]. [`metrics`] scores the output.

pub mod dataset;
pub mod experiment;
pub mod generation;
pub mod graph;
pub mod matching;
pub mod metrics;
pub mod pipeline;
pub mod tokens;

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Match(#[from] matching::MatchError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
    #[error(transparent)]
    Token(#[from] tokens::TokenError),
    #[error(transparent)]
    Generation(#[from] generation::GenerationError),
    #[error(transparent)]
    Metric(#[from] metrics::MetricError),
    #[error(transparent)]
    Data(#[from] dataset::DataError),
    #[error("{0}")]
    InvalidInput(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
