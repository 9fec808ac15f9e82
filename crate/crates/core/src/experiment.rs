//! End-to-end experiment: load inputs, split, train a baseline, run the
//! test conversations, score them, and write report and trace files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dataset::{load_corpus, read_file, split_dataset, PipelineConfig};
use crate::dataset::Conversation;
use crate::generation::{
    run_conversation, training_examples, ConversationOptions, Generator, GeneratorRegistry, TrainParams,
};
use crate::graph::{load_graph_file, KnowledgeGraph};
use crate::metrics::{evaluate_corpus, MetricReport};
use crate::pipeline::KeyPhraseSets;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPaths {
    pub kg: PathBuf,
    pub corpus: PathBuf,
    pub kps: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    pub generator: String,
    pub use_knowledge: bool,
    pub feed_ground_truth: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            generator: "retrieval".into(),
            use_knowledge: true,
            feed_ground_truth: false,
        }
    }
}

/// One line of the per-turn trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub conversation: usize,
    pub turn: usize,
    pub subgraph_entities: usize,
    pub subgraph_facts: usize,
    pub topics: Vec<String>,
    pub anchors: Vec<String>,
    pub knowledge: Vec<String>,
    pub knowledge_tokens: usize,
    pub input: String,
    pub output: String,
    pub reference: String,
}

pub struct ExperimentOutput {
    pub report: MetricReport,
    pub trace: Vec<TraceRecord>,
    pub model: Box<dyn Generator>,
}

impl ExperimentOutput {
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|r| serde_json::to_string(r).expect("trace serializes") + "\n")
            .collect()
    }

    pub fn responses(&self) -> String {
        self.trace.iter().map(|r| format!("{}\n", r.output)).collect()
    }

    pub fn prepared_inputs(&self) -> String {
        self.trace.iter().map(|r| format!("{}\n", r.input)).collect()
    }

    pub fn model_text(&self) -> String {
        let mut buf = Vec::new();
        self.model.save(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is UTF-8")
    }

    /// Writes `report.txt`, `trace.jsonl`, `responses.txt`, `prepared.txt`
    /// and `model.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), Error> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("report.txt", self.report.to_string()),
            ("trace.jsonl", self.trace_jsonl()),
            ("responses.txt", self.responses()),
            ("prepared.txt", self.prepared_inputs()),
            ("model.txt", self.model_text()),
        ];
        for (name, body) in files {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

pub fn load_kps(path: impl AsRef<Path>) -> Result<KeyPhraseSets, Error> {
    let path = path.as_ref();
    KeyPhraseSets::from_json(&read_file(path)?).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn run_experiment(
    paths: &ExperimentPaths,
    cfg: &PipelineConfig,
    opts: &ExperimentOptions,
    registry: &GeneratorRegistry,
) -> Result<ExperimentOutput, Error> {
    cfg.validate()?;
    registry.get(&opts.generator)?;
    let base = load_graph_file(&paths.kg)?;
    let corpus = load_corpus(&paths.corpus)?;
    let kps = load_kps(&paths.kps)?;
    run_experiment_with(&base, &corpus, &kps, cfg, opts, registry)
}

fn conversation_options(cfg: &PipelineConfig, opts: &ExperimentOptions) -> ConversationOptions {
    ConversationOptions {
        separator: cfg.separator.clone(),
        max_len: cfg.max_len,
        feed_ground_truth: opts.feed_ground_truth,
        use_knowledge: opts.use_knowledge,
    }
}

/// Trains `opts.generator` on teacher-forced examples from `train`.
pub fn train_model(
    base: &KnowledgeGraph,
    train: &[Conversation],
    kps: &KeyPhraseSets,
    cfg: &PipelineConfig,
    opts: &ExperimentOptions,
    registry: &GeneratorRegistry,
) -> Result<Box<dyn Generator>, Error> {
    let conv_opts = conversation_options(cfg, opts);
    let mut examples = Vec::new();
    for conv in train {
        examples.extend(training_examples(conv, base, kps, &cfg.matching, &conv_opts)?);
    }
    let params = TrainParams {
        smoothing_k: cfg.smoothing_k,
        ..Default::default()
    };
    Ok(registry.train(&opts.generator, &examples, &params)?)
}

/// Same as [`run_experiment`] on already-loaded inputs.
pub fn run_experiment_with(
    base: &KnowledgeGraph,
    corpus: &[Conversation],
    kps: &KeyPhraseSets,
    cfg: &PipelineConfig,
    opts: &ExperimentOptions,
    registry: &GeneratorRegistry,
) -> Result<ExperimentOutput, Error> {
    cfg.validate()?;
    let split = split_dataset(corpus, cfg)?;
    let conv_opts = conversation_options(cfg, opts);
    let model = train_model(base, &split.train, kps, cfg, opts, registry)?;

    let mut trace = Vec::new();
    let (mut candidates, mut references, mut inputs) = (Vec::new(), Vec::new(), Vec::new());
    for (ci, conv) in split.test.iter().enumerate() {
        let run = run_conversation(conv, base, kps, model.as_ref(), &cfg.matching, &conv_opts)?;
        for t in run.turns {
            trace.push(TraceRecord {
                conversation: ci + 1,
                turn: t.turn,
                subgraph_entities: run.subgraph_entities,
                subgraph_facts: run.subgraph_facts,
                topics: t.topics.topics().iter().map(|tp| tp.label().to_string()).collect(),
                anchors: t.mki.anchors.names().map(String::from).collect(),
                knowledge: t.mki.knowledge.clone(),
                knowledge_tokens: t.input.knowledge_token_count(),
                input: t.input.to_line(),
                output: t.output.join(" "),
                reference: t.reference.join(" "),
            });
            candidates.push(t.output);
            references.push(t.reference);
            inputs.push(t.input);
        }
    }
    let report = evaluate_corpus(&candidates, &references, &inputs, model.as_ref())?;
    Ok(ExperimentOutput {
        report,
        trace,
        model,
    })
}
