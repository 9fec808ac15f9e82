use std::collections::BTreeSet;

use serde::Serialize;

use super::{Anchors, QuestionTopicTuple, Topic};
use crate::graph::{EntityType, KnowledgeGraph, RelationType};

/// Anchors plus the knowledge entity names selected for one turn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MedicalKnowledgeInfoTuple {
    pub anchors: Anchors,
    pub knowledge: Vec<String>,
}

fn names_for(sub: &KnowledgeGraph, topic: Topic) -> BTreeSet<&str> {
    let of_type = |t: EntityType| sub.entities_of_type(t).iter().map(|e| e.name.as_str()).collect();
    let via = |r: RelationType| {
        sub.facts()
            .filter(|f| f.relation == r)
            .map(|f| f.tail.name.as_str())
            .collect()
    };
    match topic {
        Topic::DiseaseTopic => of_type(EntityType::Disease),
        Topic::SymptomTopic => of_type(EntityType::Symptom),
        Topic::DrugTopic => of_type(EntityType::Drug),
        Topic::CheckTopic => of_type(EntityType::Check),
        Topic::RecommendedFoodTopic => via(RelationType::NeedFood),
        Topic::NotRecommendedFoodTopic => via(RelationType::NoFood),
    }
}

/// Collects the subgraph entities relevant to each detected topic.
///
/// Output order is topic order, then name order within a topic. Names that
/// already appeared, including the anchor names, are skipped.
pub fn extract_knowledge(
    sub: &KnowledgeGraph,
    qt: &QuestionTopicTuple,
    anchors: &Anchors,
) -> MedicalKnowledgeInfoTuple {
    let mut seen: BTreeSet<&str> = anchors.names().collect();
    let mut knowledge = Vec::new();
    for &topic in qt.topics() {
        for name in names_for(sub, topic) {
            if seen.insert(name) {
                knowledge.push(name.to_string());
            }
        }
    }
    MedicalKnowledgeInfoTuple {
        anchors: anchors.clone(),
        knowledge,
    }
}
