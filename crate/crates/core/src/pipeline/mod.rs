//! Knowledge pipeline: subgraph generation from the patient self-report,
//! per-turn topic detection, and knowledge-tuple extraction.

mod extract;
mod subgraph;
mod topics;

pub use extract::{extract_knowledge, MedicalKnowledgeInfoTuple};
pub use subgraph::{generate_subgraph, Anchors, PatientSelfReport};
pub use topics::{detect_topics, KeyPhraseSets, QuestionTopicTuple, Topic};

use thiserror::Error;

use crate::graph::EntityType;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("no {0} entities in the knowledge graph to match against")]
    NoMatchableEntity(&'static str),
    #[error("key phrase sets: {0}")]
    KeyPhrases(String),
}

impl PipelineError {
    pub(crate) fn no_match(types: &[EntityType]) -> Self {
        PipelineError::NoMatchableEntity(match types {
            [EntityType::Department] => "Department",
            _ => "Disease/Symptom",
        })
    }
}
