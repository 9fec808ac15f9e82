use serde::Serialize;

use super::{strip_end, Generator, TrainingExample};
use crate::dataset::Conversation;
use crate::graph::KnowledgeGraph;
use crate::matching::MatchConfig;
use crate::pipeline::{
    detect_topics, extract_knowledge, generate_subgraph, KeyPhraseSets, MedicalKnowledgeInfoTuple,
    PipelineError, QuestionTopicTuple,
};
use crate::tokens::{build_model_input, tokenize, ModelInput, DEFAULT_SEPARATOR};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ConversationOptions {
    pub separator: String,
    pub max_len: usize,
    /// Feed the reference doctor response of the previous turn instead of
    /// the generated one.
    pub feed_ground_truth: bool,
    /// When false, skip knowledge injection entirely (ablation).
    pub use_knowledge: bool,
}

impl Default for ConversationOptions {
    fn default() -> Self {
        ConversationOptions {
            separator: DEFAULT_SEPARATOR.to_string(),
            max_len: 32,
            feed_ground_truth: false,
            use_knowledge: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnTrace {
    pub turn: usize,
    pub topics: QuestionTopicTuple,
    pub mki: MedicalKnowledgeInfoTuple,
    pub input: ModelInput,
    /// Generated response tokens, end token removed.
    pub output: Vec<String>,
    pub reference: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversationRun {
    pub subgraph_entities: usize,
    pub subgraph_facts: usize,
    pub turns: Vec<TurnTrace>,
}

impl ConversationRun {
    pub fn responses(&self) -> Vec<String> {
        self.turns.iter().map(|t| t.output.join(" ")).collect()
    }
}

/// One conversation's subgraph and anchors; assembles per-turn inputs.
struct TurnAssembler<'a> {
    sub: KnowledgeGraph,
    mki_anchors: crate::pipeline::Anchors,
    kps: &'a KeyPhraseSets,
    c: &'a MatchConfig,
    opts: &'a ConversationOptions,
}

impl<'a> TurnAssembler<'a> {
    fn new(
        conv: &Conversation,
        base: &KnowledgeGraph,
        kps: &'a KeyPhraseSets,
        c: &'a MatchConfig,
        opts: &'a ConversationOptions,
    ) -> Result<Self, Error> {
        // A report that matches nothing (e.g. an empty graph) runs without
        // knowledge rather than aborting the conversation.
        let (sub, anchors) = if opts.use_knowledge {
            match generate_subgraph(&conv.self_report, base, c) {
                Ok(r) => r,
                Err(PipelineError::NoMatchableEntity(_)) => Default::default(),
                Err(e) => return Err(e.into()),
            }
        } else {
            Default::default()
        };
        Ok(TurnAssembler {
            sub,
            mki_anchors: anchors,
            kps,
            c,
            opts,
        })
    }

    fn assemble(
        &self,
        question: &str,
        prev: &[String],
    ) -> Result<(QuestionTopicTuple, MedicalKnowledgeInfoTuple, ModelInput), Error> {
        let topics = detect_topics(question, self.kps, self.c);
        let mki = if self.opts.use_knowledge {
            extract_knowledge(&self.sub, &topics, &self.mki_anchors)
        } else {
            MedicalKnowledgeInfoTuple::default()
        };
        let input = build_model_input(&mki, &prev.join(" "), question, &self.opts.separator)?;
        Ok((topics, mki, input))
    }
}

/// Runs every turn: detect topics, extract knowledge from the
/// conversation's subgraph, assemble the input with the previous doctor
/// response, and generate.
pub fn run_conversation(
    conv: &Conversation,
    base: &KnowledgeGraph,
    kps: &KeyPhraseSets,
    g: &dyn Generator,
    c: &MatchConfig,
    opts: &ConversationOptions,
) -> Result<ConversationRun, Error> {
    conv.validate().map_err(Error::InvalidInput)?;
    let asm = TurnAssembler::new(conv, base, kps, c, opts)?;
    let mut turns: Vec<TurnTrace> = Vec::with_capacity(conv.turns.len());
    for (i, turn) in conv.turns.iter().enumerate() {
        let prev = match turns.last() {
            None => Vec::new(),
            Some(_) if opts.feed_ground_truth => tokenize(&conv.turns[i - 1].doctor_response),
            Some(last) => last.output.clone(),
        };
        let (topics, mki, input) = asm.assemble(&turn.patient_question, &prev)?;
        let output = strip_end(g.generate(&input, opts.max_len));
        turns.push(TurnTrace {
            turn: i + 1,
            topics,
            mki,
            input,
            output,
            reference: tokenize(&turn.doctor_response),
        });
    }
    Ok(ConversationRun {
        subgraph_entities: asm.sub.entity_count(),
        subgraph_facts: asm.sub.fact_count(),
        turns,
    })
}

/// Teacher-forced training pairs: every turn's input is built with the
/// reference response of the previous turn.
pub fn training_examples(
    conv: &Conversation,
    base: &KnowledgeGraph,
    kps: &KeyPhraseSets,
    c: &MatchConfig,
    opts: &ConversationOptions,
) -> Result<Vec<TrainingExample>, Error> {
    conv.validate().map_err(Error::InvalidInput)?;
    let asm = TurnAssembler::new(conv, base, kps, c, opts)?;
    let mut out = Vec::new();
    let mut prev = Vec::new();
    for turn in &conv.turns {
        let (_, _, input) = asm.assemble(&turn.patient_question, &prev)?;
        let response = tokenize(&turn.doctor_response);
        out.push(TrainingExample {
            input,
            response: response.clone(),
        });
        prev = response;
    }
    Ok(out)
}
