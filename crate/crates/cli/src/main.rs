use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mka_core::dataset::{corpus_to_jsonl, load_corpus, split_dataset, PipelineConfig};
use mka_core::experiment::{load_kps, run_experiment, train_model, ExperimentOptions, ExperimentPaths};
use mka_core::generation::{training_examples, ConversationOptions, GeneratorRegistry};
use mka_core::graph::{load_graph_file, KnowledgeGraph};
use mka_core::pipeline::{
    detect_topics, extract_knowledge, generate_subgraph, Anchors, KeyPhraseSets, PatientSelfReport,
};
use mka_core::tokens::build_model_input;

#[derive(Parser)]
#[command(name = "mka", version, about = "Knowledge-assisted medical dialogue toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a knowledge graph, print its statistics.
    Ingest {
        #[arg(long)]
        kg: PathBuf,
        /// Also write the deduplicated graph as TSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a corpus into train, validation and test files.
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a single pipeline stage and print its output.
    Inspect {
        #[command(subcommand)]
        stage: Stage,
    },
    /// Write the teacher-forced model input of every turn, one per line.
    Prepare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        no_knowledge: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a baseline on the train split and save it.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Baseline to train: retrieval or trigram (uniform is also registered).
        #[arg(long, default_value = "retrieval")]
        generator: String,
        #[arg(long)]
        no_knowledge: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split, train, generate on the test split, and score.
    Run {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Baseline to train: retrieval or trigram (uniform is also registered).
        #[arg(long, default_value = "retrieval")]
        generator: String,
        /// Ablation: leave knowledge and anchor segments out of the input.
        #[arg(long)]
        no_knowledge: bool,
        /// Use the reference doctor response as the previous turn.
        #[arg(long)]
        feed_ground_truth: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Stage {
    Subgraph {
        #[arg(long)]
        kg: PathBuf,
        #[command(flatten)]
        psr: PsrArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    Topics {
        #[arg(long)]
        kps: PathBuf,
        #[arg(long)]
        question: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    Extract {
        #[arg(long)]
        kg: PathBuf,
        #[arg(long)]
        kps: PathBuf,
        #[command(flatten)]
        psr: PsrArgs,
        #[arg(long)]
        question: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    Prepare {
        #[arg(long)]
        kg: PathBuf,
        #[arg(long)]
        kps: PathBuf,
        #[command(flatten)]
        psr: PsrArgs,
        #[arg(long)]
        question: String,
        /// Previous doctor response.
        #[arg(long, default_value = "")]
        prev: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    kg: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    kps: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML pipeline configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct PsrArgs {
    /// Department blank of the self-report.
    #[arg(long)]
    department: Option<String>,
    /// Disease or symptom blank of the self-report.
    #[arg(long)]
    condition: Option<String>,
}

impl PsrArgs {
    fn report(&self) -> PatientSelfReport {
        PatientSelfReport::new(self.department.clone(), self.condition.clone())
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
    }
    fs::write(path, body).with_context(|| format!("{}", path.display()))
}

fn subgraph_for(kg: &Path, psr: &PsrArgs, cfg: &PipelineConfig) -> Result<(KnowledgeGraph, Anchors)> {
    let base = load_graph_file(kg)?;
    Ok(generate_subgraph(&psr.report(), &base, &cfg.matching)?)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { kg, out } => {
            let g = load_graph_file(&kg)?;
            print!("{}", g.stats());
            if let Some(out) = out {
                write_file(&out, &g.to_tsv())?;
            }
        }
        Command::Split { corpus, cfg, out_dir } => {
            let cfg = cfg.load()?;
            let convs = load_corpus(&corpus)?;
            let split = split_dataset(&convs, &cfg)?;
            for (name, part) in [("train", &split.train), ("validation", &split.validation), ("test", &split.test)] {
                write_file(&out_dir.join(format!("{name}.jsonl")), &corpus_to_jsonl(part))?;
                println!("{name}\t{}", part.len());
            }
        }
        Command::Inspect { stage } => inspect(stage)?,
        Command::Prepare { data, cfg, no_knowledge, out } => {
            let cfg = cfg.load()?;
            let base = load_graph_file(&data.kg)?;
            let kps = load_kps(&data.kps)?;
            let opts = ConversationOptions {
                separator: cfg.separator.clone(),
                max_len: cfg.max_len,
                feed_ground_truth: true,
                use_knowledge: !no_knowledge,
            };
            let mut body = String::new();
            for conv in load_corpus(&data.corpus)? {
                for ex in training_examples(&conv, &base, &kps, &cfg.matching, &opts)? {
                    body.push_str(&ex.input.to_line());
                    body.push('\n');
                }
            }
            match out {
                Some(p) => write_file(&p, &body)?,
                None => print!("{body}"),
            }
        }
        Command::Train { data, cfg, generator, no_knowledge, out } => {
            let cfg = cfg.load()?;
            let registry = GeneratorRegistry::with_builtins();
            let opts = ExperimentOptions {
                generator,
                use_knowledge: !no_knowledge,
                feed_ground_truth: true,
            };
            let base = load_graph_file(&data.kg)?;
            let kps = load_kps(&data.kps)?;
            let split = split_dataset(&load_corpus(&data.corpus)?, &cfg)?;
            let model = train_model(&base, &split.train, &kps, &cfg, &opts, &registry)?;
            let mut buf = Vec::new();
            model.save(&mut buf)?;
            write_file(&out, &String::from_utf8(buf)?)?;
            println!("{}\t{} outcome tokens", model.kind(), model.vocabulary().len());
        }
        Command::Run { data, cfg, generator, no_knowledge, feed_ground_truth, out_dir } => {
            let cfg = cfg.load()?;
            let paths = ExperimentPaths {
                kg: data.kg,
                corpus: data.corpus,
                kps: data.kps,
            };
            let opts = ExperimentOptions {
                generator,
                use_knowledge: !no_knowledge,
                feed_ground_truth,
            };
            let out = run_experiment(&paths, &cfg, &opts, &GeneratorRegistry::with_builtins())?;
            print!("{}", out.report);
            if let Some(dir) = out_dir {
                out.write_to(&dir)?;
            }
        }
    }
    Ok(())
}

fn inspect(stage: Stage) -> Result<()> {
    match stage {
        Stage::Subgraph { kg, psr, cfg } => {
            let (sub, anchors) = subgraph_for(&kg, &psr, &cfg.load()?)?;
            let names: Vec<&str> = anchors.names().collect();
            println!("anchors\t{}", names.join(", "));
            println!("entities\t{}", sub.entity_count());
            println!("facts\t{}", sub.fact_count());
            for f in sub.facts() {
                println!("{f}");
            }
        }
        Stage::Topics { kps, question, cfg } => {
            let qt = detect_topics(&question, &load_kps(&kps)?, &cfg.load()?.matching);
            for t in qt.topics() {
                println!("{t}");
            }
        }
        Stage::Extract { kg, kps, psr, question, cfg } => {
            let cfg = cfg.load()?;
            let kps: KeyPhraseSets = load_kps(&kps)?;
            let (sub, anchors) = subgraph_for(&kg, &psr, &cfg)?;
            let qt = detect_topics(&question, &kps, &cfg.matching);
            let mki = extract_knowledge(&sub, &qt, &anchors);
            let names: Vec<&str> = mki.anchors.names().collect();
            println!("anchors\t{}", names.join(", "));
            println!("knowledge\t{}", mki.knowledge.join(", "));
        }
        Stage::Prepare { kg, kps, psr, question, prev, cfg } => {
            let cfg = cfg.load()?;
            let kps = load_kps(&kps)?;
            let (sub, anchors) = subgraph_for(&kg, &psr, &cfg)?;
            let qt = detect_topics(&question, &kps, &cfg.matching);
            let mki = extract_knowledge(&sub, &qt, &anchors);
            println!("{}", build_model_input(&mki, &prev, &question, &cfg.separator)?.to_line());
        }
    }
    Ok(())
}
