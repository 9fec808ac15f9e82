//! Independent oracles and fixtures shared by the integration tests.
//!
//! Everything here is written against raw fact lists and plain vectors so
//! it does not lean on the indexes or helpers it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mka_core::graph::{load_graph, Entity, EntityType, FactRecord, FactTuple, KnowledgeGraph, RelationType};
use mka_core::matching::MatchConfig;
use mka_core::pipeline::{Anchors, PatientSelfReport, Topic};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

// ---- strings ----

const ALPHABET: &[char] = &['a', 'b', 'c', 'é', 'ß', '中', '文', '病', '🙂', ' '];

/// Mostly a small alphabet (so strings collide and share structure), with
/// arbitrary scalar values mixed in.
pub fn random_string<R: Rng>(rng: &mut R, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.8) {
                *ALPHABET.choose(rng).unwrap()
            } else {
                rng.gen::<char>()
            }
        })
        .collect()
}

pub fn lev_oracle(u: &str, v: &str) -> usize {
    let a: Vec<char> = u.chars().collect();
    let b: Vec<char> = v.chars().collect();
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        t[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

/// Every position up to the longer length that is absent on one side or
/// differs counts once.
pub fn ham_oracle(u: &str, v: &str) -> usize {
    let a: Vec<char> = u.chars().collect();
    let b: Vec<char> = v.chars().collect();
    (0..a.len().max(b.len()))
        .filter(|&i| a.get(i) != b.get(i))
        .count()
}

pub fn dist_oracle(u: &str, v: &str, c: &MatchConfig) -> f64 {
    c.alpha * lev_oracle(u, v) as f64 + c.beta * ham_oracle(u, v) as f64
}

/// Minimum combined distance; ties go to the smallest entity.
pub fn argmin_oracle<'a>(query: &str, pool: &'a [Entity], c: &MatchConfig) -> Option<&'a Entity> {
    let dists: Vec<f64> = pool.iter().map(|e| dist_oracle(query, &e.name, c)).collect();
    let min = dists.iter().copied().fold(f64::INFINITY, f64::min);
    pool.iter()
        .zip(&dists)
        .filter(|(_, &d)| d == min)
        .map(|(e, _)| e)
        .min()
}

// ---- graphs ----

fn pool(t: EntityType) -> &'static [&'static str] {
    match t {
        EntityType::Department => &["cardiology", "neurology", "ent", "pediatrics"],
        EntityType::Disease => &["angina", "arrhythmia", "migraine", "otitis", "flu", "cough"],
        EntityType::Symptom => &["chest pain", "headache", "fever", "cough", "nausea", "dizziness"],
        EntityType::Food => &["oatmeal", "fried food", "coffee", "rice", "apple"],
        EntityType::Check => &["ecg", "mri", "blood test", "x-ray"],
        EntityType::Drug => &["nitroglycerin", "aspirin", "ibuprofen", "beta blocker"],
    }
}

/// A schema-valid random graph. "cough" exists as both a disease and a
/// symptom to exercise same-name entities of different types.
pub fn random_graph<R: Rng>(rng: &mut R) -> KnowledgeGraph {
    let n = rng.gen_range(0..40);
    let records: Vec<FactRecord> = (0..n)
        .map(|_| {
            let r = *RelationType::ALL.choose(rng).unwrap();
            let ht = *r.head_types().choose(rng).unwrap();
            let tt = r.tail_type();
            FactRecord::new(
                *pool(ht).choose(rng).unwrap(),
                ht,
                r,
                *pool(tt).choose(rng).unwrap(),
                tt,
            )
        })
        .filter(|rec| !(rec.head == rec.tail && rec.head_type == rec.tail_type))
        .collect();
    load_graph(&records).expect("generated records are schema-valid")
}

fn perturb<R: Rng>(rng: &mut R, s: &str) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    match rng.gen_range(0..3) {
        0 if !chars.is_empty() => {
            chars.remove(rng.gen_range(0..chars.len()));
        }
        1 if !chars.is_empty() => {
            let i = rng.gen_range(0..chars.len());
            chars[i] = 'x';
        }
        _ => chars.push('s'),
    }
    chars.into_iter().collect()
}

fn random_field<R: Rng>(rng: &mut R, types: &[EntityType]) -> Option<String> {
    let t = *types.choose(rng).unwrap();
    let name = *pool(t).choose(rng).unwrap();
    match rng.gen_range(0..5) {
        0 => None,
        1 => Some(perturb(rng, name)),
        2 => Some(random_string(rng, 8)),
        _ => Some(name.to_string()),
    }
}

pub fn random_psr<R: Rng>(rng: &mut R) -> PatientSelfReport {
    PatientSelfReport::new(
        random_field(rng, &[EntityType::Department]),
        random_field(rng, &[EntityType::Disease, EntityType::Symptom]),
    )
}

pub fn random_config<R: Rng>(rng: &mut R) -> MatchConfig {
    match rng.gen_range(0..3) {
        0 => MatchConfig::default(),
        1 => MatchConfig::levenshtein_only(),
        _ => MatchConfig {
            alpha: rng.gen_range(0.05..2.0),
            beta: rng.gen_range(0.0..2.0),
            delta: 0.7,
        },
    }
}

/// Anchors chosen by the argmin oracle over the raw entity list.
pub fn anchors_oracle(psr: &PatientSelfReport, base: &KnowledgeGraph, c: &MatchConfig) -> Option<Anchors> {
    let entities: Vec<Entity> = base.entities().cloned().collect();
    let of = |types: &[EntityType]| -> Vec<Entity> {
        entities.iter().filter(|e| types.contains(&e.etype)).cloned().collect()
    };
    let mut a = Anchors::default();
    if let Some(text) = psr.department() {
        a.department = Some(argmin_oracle(text, &of(&[EntityType::Department]), c)?.clone());
    }
    if let Some(text) = psr.disease_symptom() {
        a.condition = Some(argmin_oracle(text, &of(&[EntityType::Disease, EntityType::Symptom]), c)?.clone());
    }
    Some(a)
}

const CARE: [RelationType; 4] = [
    RelationType::NeedDrug,
    RelationType::NeedCheck,
    RelationType::NeedFood,
    RelationType::NoFood,
];

/// Subgraph facts by scanning the base fact list for the edge patterns of
/// each branch.
pub fn subgraph_oracle(base: &KnowledgeGraph, a: &Anchors) -> BTreeSet<FactTuple> {
    let facts: Vec<&FactTuple> = base.facts().collect();
    let from = |e: &Entity, rels: &[RelationType]| -> Vec<FactTuple> {
        facts
            .iter()
            .filter(|f| &f.head == e && rels.contains(&f.relation))
            .map(|f| (*f).clone())
            .collect()
    };
    let mut out = BTreeSet::new();
    if let Some(d) = &a.department {
        for f in from(d, &[RelationType::HasDisease]) {
            out.extend(from(&f.tail, &[RelationType::HasSymptom]));
            out.insert(f);
        }
    }
    if let Some(c) = &a.condition {
        let diseases: Vec<Entity> = if c.etype == EntityType::Disease {
            vec![c.clone()]
        } else {
            facts
                .iter()
                .filter(|f| f.relation == RelationType::HasSymptom && &f.tail == c)
                .map(|f| f.head.clone())
                .collect()
        };
        for d in &diseases {
            for f in from(d, &[RelationType::HasSymptom]) {
                if c.etype == EntityType::Disease {
                    out.extend(from(&f.tail, &CARE));
                }
                out.insert(f);
            }
            out.extend(from(d, &CARE));
        }
        if c.etype == EntityType::Symptom {
            out.extend(from(c, &CARE));
        }
    }
    out
}

/// Knowledge names by scanning the subgraph's facts and anchors.
pub fn extract_oracle(sub: &KnowledgeGraph, topics: &[Topic], a: &Anchors) -> Vec<String> {
    let mut endpoints: Vec<(Entity, Option<RelationType>)> = Vec::new();
    for f in sub.facts() {
        endpoints.push((f.head.clone(), None));
        endpoints.push((f.tail.clone(), Some(f.relation)));
    }
    let anchor_names: Vec<String> = a.names().map(String::from).collect();
    let mut out: Vec<String> = Vec::new();
    for t in topics {
        let mut names: Vec<String> = endpoints
            .iter()
            .filter(|(e, via)| match t {
                Topic::DiseaseTopic => e.etype == EntityType::Disease,
                Topic::SymptomTopic => e.etype == EntityType::Symptom,
                Topic::DrugTopic => e.etype == EntityType::Drug,
                Topic::CheckTopic => e.etype == EntityType::Check,
                Topic::RecommendedFoodTopic => *via == Some(RelationType::NeedFood),
                Topic::NotRecommendedFoodTopic => *via == Some(RelationType::NoFood),
            })
            .map(|(e, _)| e.name.clone())
            .collect();
        names.sort();
        names.dedup();
        for n in names {
            if !anchor_names.contains(&n) && !out.contains(&n) {
                out.push(n);
            }
        }
    }
    out
}

// ---- metrics ----

fn ngrams(s: &[String], n: usize) -> Vec<Vec<String>> {
    if s.len() < n {
        return Vec::new();
    }
    (0..=s.len() - n).map(|i| s[i..i + n].to_vec()).collect()
}

fn count(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

fn distinct(list: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut d: Vec<Vec<String>> = Vec::new();
    for g in list {
        if !d.contains(g) {
            d.push(g.clone());
        }
    }
    d
}

pub fn bleu_oracle(c: &[String], r: &[String], n: usize) -> f64 {
    let mut logp = 0.0;
    for m in 1..=n {
        let cg = ngrams(c, m);
        let rg = ngrams(r, m);
        let matched: usize = distinct(&cg).iter().map(|g| count(&cg, g).min(count(&rg, g))).sum();
        let p = if matched == 0 {
            1.0 / (cg.len() as f64 + 1.0)
        } else {
            matched as f64 / cg.len() as f64
        };
        logp += p.ln();
    }
    let bp = if c.len() >= r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    };
    bp * (logp / n as f64).exp()
}

pub fn nist_oracle(cands: &[Vec<String>], refs: &[Vec<String>], n: usize) -> f64 {
    let ref_words: usize = refs.iter().map(Vec::len).sum();
    let cand_words: usize = cands.iter().map(Vec::len).sum();
    let corpus = |m: usize| -> Vec<Vec<String>> { refs.iter().flat_map(|r| ngrams(r, m)).collect() };
    let mut score = 0.0;
    for m in 1..=n {
        let full = corpus(m);
        let shorter = corpus(m - 1);
        let mut gained = 0.0;
        let mut total = 0;
        for (c, r) in cands.iter().zip(refs) {
            let cg = ngrams(c, m);
            let rg = ngrams(r, m);
            total += cg.len();
            for g in distinct(&cg) {
                let hit = count(&cg, &g).min(count(&rg, &g));
                if hit > 0 {
                    let denom = if m == 1 { ref_words } else { count(&shorter, &g[..m - 1]) };
                    gained += hit as f64 * (denom as f64 / count(&full, &g) as f64).log2();
                }
            }
        }
        if total > 0 {
            score += gained / total as f64;
        }
    }
    let beta = 0.5f64.ln() / (2.0f64 / 3.0).ln().powi(2);
    let ratio = if ref_words == 0 {
        1.0
    } else {
        (cand_words as f64 / ref_words as f64).min(1.0)
    };
    score * (beta * ratio.ln().powi(2)).exp()
}

pub fn meteor_oracle(c: &[String], r: &[String]) -> f64 {
    let mut taken = vec![false; r.len()];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, w) in c.iter().enumerate() {
        for j in 0..r.len() {
            if !taken[j] && r[j] == *w {
                taken[j] = true;
                pairs.push((i, j));
                break;
            }
        }
    }
    if pairs.is_empty() {
        return 0.0;
    }
    let mut chunks = 1;
    for k in 1..pairs.len() {
        if pairs[k].0 != pairs[k - 1].0 + 1 || pairs[k].1 != pairs[k - 1].1 + 1 {
            chunks += 1;
        }
    }
    let m = pairs.len() as f64;
    let p = m / c.len() as f64;
    let rec = m / r.len() as f64;
    let f = 10.0 * p * rec / (rec + 9.0 * p);
    f * (1.0 - 0.5 * (chunks as f64 / m).powi(3))
}

pub fn entropy_oracle(resps: &[Vec<String>], n: usize) -> f64 {
    let all: Vec<Vec<String>> = resps.iter().flat_map(|r| ngrams(r, n)).collect();
    if all.is_empty() {
        return 0.0;
    }
    let total = all.len() as f64;
    distinct(&all)
        .iter()
        .map(|g| {
            let p = count(&all, g) as f64 / total;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0)
}

pub fn dist_oracle_n(resps: &[Vec<String>], n: usize) -> f64 {
    let all: Vec<Vec<String>> = resps.iter().flat_map(|r| ngrams(r, n)).collect();
    if all.is_empty() {
        return 0.0;
    }
    distinct(&all).len() as f64 / all.len() as f64
}

pub fn random_sentence<R: Rng>(rng: &mut R, min: usize, max: usize) -> Vec<String> {
    let words = ["a", "b", "c", "d", "e"];
    (0..rng.gen_range(min..=max))
        .map(|_| words.choose(rng).unwrap().to_string())
        .collect()
}
