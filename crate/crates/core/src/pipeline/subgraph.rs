use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::graph::{Entity, EntityType, FactTuple, KnowledgeGraph, RelationType};
use crate::matching::{best_match, MatchConfig};

/// The two free-text blanks of the pre-consultation form. Blank or
/// whitespace-only answers are stored as absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawSelfReport")]
pub struct PatientSelfReport {
    department: Option<String>,
    disease_symptom: Option<String>,
}

#[derive(Deserialize)]
struct RawSelfReport {
    #[serde(default)]
    department: Option<String>,
    #[serde(default)]
    disease_symptom: Option<String>,
}

impl From<RawSelfReport> for PatientSelfReport {
    fn from(r: RawSelfReport) -> Self {
        PatientSelfReport::new(r.department, r.disease_symptom)
    }
}

fn present(s: Option<String>) -> Option<String> {
    s.map(|s| s.trim().to_string()).filter(|s| !s.is_empty())
}

impl PatientSelfReport {
    pub fn new<S: Into<String>>(department: Option<S>, disease_symptom: Option<S>) -> Self {
        PatientSelfReport {
            department: present(department.map(Into::into)),
            disease_symptom: present(disease_symptom.map(Into::into)),
        }
    }

    pub fn blank() -> Self {
        Self::default()
    }

    pub fn department(&self) -> Option<&str> {
        self.department.as_deref()
    }

    pub fn disease_symptom(&self) -> Option<&str> {
        self.disease_symptom.as_deref()
    }
}

/// Entities matched from the self-report: the department and the
/// disease-or-symptom.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Anchors {
    pub department: Option<Entity>,
    pub condition: Option<Entity>,
}

impl Anchors {
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.department
            .iter()
            .chain(self.condition.iter())
            .map(|e| e.name.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.department.is_none() && self.condition.is_none()
    }
}

/// Builds the per-case subgraph of `base` rooted at the entities matched
/// from the self-report.
///
/// The department branch takes every disease of the matched department and
/// each of those diseases' symptoms. The condition branch depends on the
/// matched type: a disease contributes its symptoms, its care facts and its
/// symptoms' care facts; a symptom contributes the diseases presenting it
/// (HasSymptom traversed backwards), their other symptoms and care facts,
/// and its own care facts.
pub fn generate_subgraph(
    psr: &PatientSelfReport,
    base: &KnowledgeGraph,
    c: &MatchConfig,
) -> Result<(KnowledgeGraph, Anchors), PipelineError> {
    let mut facts = BTreeSet::new();
    let mut anchors = Anchors::default();

    if let Some(text) = psr.department() {
        let dept = match_in(base, text, &[EntityType::Department], c)?;
        department_branch(base, &dept, &mut facts);
        anchors.department = Some(dept);
    }

    if let Some(text) = psr.disease_symptom() {
        let cond = match_in(base, text, &[EntityType::Disease, EntityType::Symptom], c)?;
        match cond.etype {
            EntityType::Disease => disease_branch(base, &cond, &mut facts),
            _ => symptom_branch(base, &cond, &mut facts),
        }
        anchors.condition = Some(cond);
    }

    let extra = anchors
        .department
        .iter()
        .chain(anchors.condition.iter())
        .cloned()
        .collect();
    Ok((KnowledgeGraph::from_valid_facts(facts, extra), anchors))
}

fn match_in(
    base: &KnowledgeGraph,
    text: &str,
    types: &[EntityType],
    c: &MatchConfig,
) -> Result<Entity, PipelineError> {
    let pool = types.iter().flat_map(|&t| base.entities_of_type(t));
    best_match(text, pool, c)
        .cloned()
        .map_err(|_| PipelineError::no_match(types))
}

fn push(facts: &mut BTreeSet<FactTuple>, head: &Entity, r: RelationType, tail: &Entity) {
    facts.insert(FactTuple::new(head.clone(), r, tail.clone()));
}

fn care_facts(base: &KnowledgeGraph, e: &Entity, facts: &mut BTreeSet<FactTuple>) {
    for r in RelationType::CARE {
        for t in base.tails(e, r) {
            push(facts, e, r, t);
        }
    }
}

fn department_branch(base: &KnowledgeGraph, dept: &Entity, facts: &mut BTreeSet<FactTuple>) {
    for disease in base.tails(dept, RelationType::HasDisease) {
        push(facts, dept, RelationType::HasDisease, disease);
        for s in base.tails(disease, RelationType::HasSymptom) {
            push(facts, disease, RelationType::HasSymptom, s);
        }
    }
}

fn disease_branch(base: &KnowledgeGraph, disease: &Entity, facts: &mut BTreeSet<FactTuple>) {
    for s in base.tails(disease, RelationType::HasSymptom) {
        push(facts, disease, RelationType::HasSymptom, s);
        care_facts(base, s, facts);
    }
    care_facts(base, disease, facts);
}

fn symptom_branch(base: &KnowledgeGraph, symptom: &Entity, facts: &mut BTreeSet<FactTuple>) {
    let diseases = base
        .predecessors(symptom, RelationType::HasSymptom)
        .unwrap_or(&[]);
    for d in diseases {
        for s in base.tails(d, RelationType::HasSymptom) {
            push(facts, d, RelationType::HasSymptom, s);
        }
        care_facts(base, d, facts);
    }
    care_facts(base, symptom, facts);
}
