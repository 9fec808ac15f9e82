mod common;

use common::data_dir;
use mka_core::dataset::{load_corpus, split_dataset, PipelineConfig};
use mka_core::experiment::load_kps;
use mka_core::graph::load_graph_file;
use mka_core::matching::MatchConfig;
use mka_core::pipeline::{detect_topics, generate_subgraph, KeyPhraseSets, PatientSelfReport, Topic};

#[test]
fn bundled_files_load() {
    let g = load_graph_file(data_dir().join("cardiology.tsv")).unwrap();
    assert_eq!((g.entity_count(), g.fact_count()), (10, 10));
    let toy = load_graph_file(data_dir().join("toy_kg.tsv")).unwrap();
    assert!(toy.fact_count() > g.fact_count());
    assert!(g.facts().all(|f| toy.contains_fact(f)));

    let corpus = load_corpus(data_dir().join("toy_corpus.jsonl")).unwrap();
    assert_eq!(corpus.len(), 10);
    assert!(corpus.iter().all(|c| c.validate().is_ok()));

    let cfg = PipelineConfig::load(data_dir().join("config.toml")).unwrap();
    assert_eq!(cfg, PipelineConfig::default());
    let s = split_dataset(&corpus, &cfg).unwrap();
    assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
}

#[test]
fn bundled_kps_round_trips() {
    let kps = load_kps(data_dir().join("kps.json")).unwrap();
    assert_eq!(KeyPhraseSets::from_json(&kps.to_json()).unwrap(), kps);
    for t in Topic::ALL {
        assert!(!kps.phrases(t).is_empty(), "{t} has no phrases");
    }
}

#[test]
fn every_toy_question_fires_a_topic_except_thanks() {
    let kps = load_kps(data_dir().join("kps.json")).unwrap();
    for conv in load_corpus(data_dir().join("toy_corpus.jsonl")).unwrap() {
        for t in &conv.turns {
            let qt = detect_topics(&t.patient_question, &kps, &MatchConfig::default());
            assert_eq!(qt.is_empty(), t.patient_question == "thanks", "{:?}", t.patient_question);
        }
    }
}

#[test]
fn pipeline_is_deterministic_on_toy_graph() {
    let base = load_graph_file(data_dir().join("toy_kg.tsv")).unwrap();
    for c in [MatchConfig::default(), MatchConfig::levenshtein_only()] {
        for conv in load_corpus(data_dir().join("toy_corpus.jsonl")).unwrap() {
            let a = generate_subgraph(&conv.self_report, &base, &c).unwrap();
            let b = generate_subgraph(&conv.self_report, &base, &c).unwrap();
            assert_eq!(a, b);
            assert!(a.0.facts().all(|f| base.contains_fact(f)));
        }
    }
}

#[test]
fn exact_names_anchor_under_levenshtein_weights() {
    let base = load_graph_file(data_dir().join("toy_kg.tsv")).unwrap();
    for conv in load_corpus(data_dir().join("toy_corpus.jsonl")).unwrap() {
        let psr: &PatientSelfReport = &conv.self_report;
        let (_, a) = generate_subgraph(psr, &base, &MatchConfig::levenshtein_only()).unwrap();
        assert_eq!(a.department.as_ref().map(|e| e.name.as_str()), psr.department());
        assert_eq!(a.condition.as_ref().map(|e| e.name.as_str()), psr.disease_symptom());
    }
}

#[test]
fn experiment_files_round_trip() {
    use mka_core::experiment::{run_experiment, ExperimentOptions, ExperimentPaths};
    use mka_core::generation::GeneratorRegistry;
    use mka_core::metrics::MetricReport;

    let paths = ExperimentPaths {
        kg: data_dir().join("toy_kg.tsv"),
        corpus: data_dir().join("toy_corpus.jsonl"),
        kps: data_dir().join("kps.json"),
    };
    let registry = GeneratorRegistry::with_builtins();
    let out = run_experiment(&paths, &PipelineConfig::default(), &ExperimentOptions::default(), &registry).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write_to(dir.path()).unwrap();

    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let parsed = MetricReport::parse(&report).unwrap();
    assert_eq!(parsed.to_string(), report);
    let model = registry.load_file(dir.path().join("model.txt")).unwrap();
    assert_eq!(model.vocabulary(), out.model.vocabulary());
    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), out.trace.len());

    let missing = ExperimentPaths { kg: "/no/such/graph.tsv".into(), ..paths };
    let err = run_experiment(&missing, &PipelineConfig::default(), &ExperimentOptions::default(), &registry)
        .err()
        .unwrap();
    assert!(err.to_string().contains("/no/such/graph.tsv"), "{err}");
}
