//! Model-input assembly: unseen knowledge, then the self-report anchors,
//! then the previous doctor response, then the patient question.

use serde::Serialize;
use thiserror::Error;

use crate::pipeline::MedicalKnowledgeInfoTuple;

pub const DEFAULT_SEPARATOR: &str = "<sep>";

#[derive(Debug, Error, PartialEq)]
pub enum TokenError {
    #[error("separator {0:?} occurs as a content token")]
    SeparatorCollision(String),
    #[error("separator must be non-empty and contain no whitespace, got {0:?}")]
    InvalidSeparator(String),
}

fn is_unspaced_script(c: char) -> bool {
    matches!(c as u32,
        0x3000..=0x303F     // CJK punctuation
        | 0x3040..=0x30FF   // kana
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0xFF00..=0xFFEF   // full-width forms
        | 0x20000..=0x2FA1F)
}

/// Lowercases, splits on whitespace, and breaks CJK runs into one token per
/// character. Runs of other characters stay whole.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    for chunk in lower.split_whitespace() {
        let mut run = String::new();
        for c in chunk.chars() {
            if is_unspaced_script(c) {
                if !run.is_empty() {
                    out.push(std::mem::take(&mut run));
                }
                out.push(c.to_string());
            } else {
                run.push(c);
            }
        }
        if !run.is_empty() {
            out.push(run);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SegmentKind {
    KnowledgeUnseen,
    AnchorsSeen,
    PrevDoctorResponse,
    PatientQuestion,
}

impl SegmentKind {
    pub const ORDER: [SegmentKind; 4] = [
        SegmentKind::KnowledgeUnseen,
        SegmentKind::AnchorsSeen,
        SegmentKind::PrevDoctorResponse,
        SegmentKind::PatientQuestion,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelInput {
    segments: Vec<Segment>,
    flat: Vec<String>,
    separator: String,
}

impl ModelInput {
    /// Assembles the four segments in fixed order. Empty segments are
    /// dropped from the flat sequence together with their separator.
    pub fn from_segments(
        knowledge: Vec<String>,
        anchors: Vec<String>,
        prev_response: Vec<String>,
        question: Vec<String>,
        sep: &str,
    ) -> Result<Self, TokenError> {
        if sep.is_empty() || sep.chars().any(char::is_whitespace) {
            return Err(TokenError::InvalidSeparator(sep.to_string()));
        }
        let segments: Vec<Segment> = SegmentKind::ORDER
            .into_iter()
            .zip([knowledge, anchors, prev_response, question])
            .map(|(kind, tokens)| Segment { kind, tokens })
            .collect();
        if segments.iter().flat_map(|s| &s.tokens).any(|t| t == sep) {
            return Err(TokenError::SeparatorCollision(sep.to_string()));
        }
        let mut flat = Vec::new();
        for seg in segments.iter().filter(|s| !s.tokens.is_empty()) {
            if !flat.is_empty() {
                flat.push(sep.to_string());
            }
            flat.extend(seg.tokens.iter().cloned());
        }
        Ok(ModelInput {
            segments,
            flat,
            separator: sep.to_string(),
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, kind: SegmentKind) -> &[String] {
        &self.segments[kind as usize].tokens
    }

    pub fn patient_question(&self) -> &[String] {
        self.segment(SegmentKind::PatientQuestion)
    }

    pub fn flat(&self) -> &[String] {
        &self.flat
    }

    pub fn separator(&self) -> &str {
        &self.separator
    }

    /// Space-joined flat tokens, as written to prepared-input files.
    pub fn to_line(&self) -> String {
        self.flat.join(" ")
    }

    /// Number of tokens taken from the knowledge graph (unseen knowledge
    /// plus anchors).
    pub fn knowledge_token_count(&self) -> usize {
        self.segment(SegmentKind::KnowledgeUnseen).len() + self.segment(SegmentKind::AnchorsSeen).len()
    }
}

/// Splits a flat sequence back into its non-empty segments.
pub fn split_flat(flat: &[String], sep: &str) -> Vec<Vec<String>> {
    if flat.is_empty() {
        return Vec::new();
    }
    flat.split(|t| t == sep).map(<[String]>::to_vec).collect()
}

pub fn build_model_input(
    mki: &MedicalKnowledgeInfoTuple,
    prev_response: &str,
    question: &str,
    sep: &str,
) -> Result<ModelInput, TokenError> {
    let knowledge = mki.knowledge.iter().flat_map(|k| tokenize(k)).collect();
    let anchors = mki.anchors.names().flat_map(tokenize).collect();
    ModelInput::from_segments(knowledge, anchors, tokenize(prev_response), tokenize(question), sep)
}
