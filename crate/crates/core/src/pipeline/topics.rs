use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::PipelineError;
use crate::matching::{similarity_chars, MatchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Topic {
    DiseaseTopic,
    SymptomTopic,
    DrugTopic,
    CheckTopic,
    RecommendedFoodTopic,
    NotRecommendedFoodTopic,
}

impl Topic {
    pub const ALL: [Topic; 6] = [
        Topic::DiseaseTopic,
        Topic::SymptomTopic,
        Topic::DrugTopic,
        Topic::CheckTopic,
        Topic::RecommendedFoodTopic,
        Topic::NotRecommendedFoodTopic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Topic::DiseaseTopic => "DiseaseTopic",
            Topic::SymptomTopic => "SymptomTopic",
            Topic::DrugTopic => "DrugTopic",
            Topic::CheckTopic => "CheckTopic",
            Topic::RecommendedFoodTopic => "RecommendedFoodTopic",
            Topic::NotRecommendedFoodTopic => "NotRecommendedFoodTopic",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Topic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Topic::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| format!("unknown topic {s:?}"))
    }
}

/// One phrase list per topic. Every topic is present, lists may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPhraseSets {
    sets: BTreeMap<Topic, Vec<String>>,
}

impl KeyPhraseSets {
    pub fn empty() -> Self {
        KeyPhraseSets {
            sets: Topic::ALL.into_iter().map(|t| (t, Vec::new())).collect(),
        }
    }

    /// Phrases are trimmed; empty or repeated phrases within a topic are
    /// rejected.
    pub fn new<I, P>(sets: I) -> Result<Self, PipelineError>
    where
        I: IntoIterator<Item = (Topic, Vec<P>)>,
        P: Into<String>,
    {
        let mut kps = Self::empty();
        for (topic, phrases) in sets {
            let mut seen = BTreeSet::new();
            let mut list = Vec::new();
            for p in phrases {
                let p: String = p.into().trim().to_string();
                if p.is_empty() {
                    return Err(PipelineError::KeyPhrases(format!("empty phrase under {topic}")));
                }
                if !seen.insert(p.clone()) {
                    return Err(PipelineError::KeyPhrases(format!(
                        "duplicate phrase {p:?} under {topic}"
                    )));
                }
                list.push(p);
            }
            kps.sets.insert(topic, list);
        }
        Ok(kps)
    }

    /// Reads the JSON form: an object with exactly the six topic labels as
    /// keys, each mapping to an array of strings.
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(text).map_err(|e| PipelineError::KeyPhrases(e.to_string()))?;
        let mut sets = Vec::new();
        for (key, phrases) in &raw {
            let topic: Topic = key.parse().map_err(PipelineError::KeyPhrases)?;
            sets.push((topic, phrases.clone()));
        }
        for t in Topic::ALL {
            if !raw.contains_key(t.label()) {
                return Err(PipelineError::KeyPhrases(format!("missing topic key {t}")));
            }
        }
        Self::new(sets)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, &Vec<String>> =
            self.sets.iter().map(|(t, p)| (t.label(), p)).collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }

    pub fn phrases(&self, t: Topic) -> &[String] {
        &self.sets[&t]
    }
}

/// Topics asked about in one turn, deduplicated, in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QuestionTopicTuple(Vec<Topic>);

impl QuestionTopicTuple {
    pub fn topics(&self) -> &[Topic] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: Topic) -> bool {
        self.0.contains(&t)
    }
}

impl FromIterator<Topic> for QuestionTopicTuple {
    fn from_iter<I: IntoIterator<Item = Topic>>(iter: I) -> Self {
        let set: BTreeSet<Topic> = iter.into_iter().collect();
        QuestionTopicTuple(set.into_iter().collect())
    }
}

impl fmt::Display for QuestionTopicTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.0.iter().map(|t| t.label()).collect();
        write!(f, "[{}]", labels.join(", "))
    }
}

/// A topic fires when one of its phrases occurs in the question verbatim,
/// or when some window of the question with the phrase's length is more
/// similar to it than `c.delta`. Both sides are lowercased first.
pub fn detect_topics(question: &str, kps: &KeyPhraseSets, c: &MatchConfig) -> QuestionTopicTuple {
    let q = question.to_lowercase();
    let q_chars: Vec<char> = q.chars().collect();
    Topic::ALL
        .into_iter()
        .filter(|&t| {
            kps.phrases(t)
                .iter()
                .any(|p| phrase_matches(&q, &q_chars, &p.to_lowercase(), c))
        })
        .collect()
}

fn phrase_matches(q: &str, q_chars: &[char], phrase: &str, c: &MatchConfig) -> bool {
    if q.contains(phrase) {
        return true;
    }
    let p: Vec<char> = phrase.chars().collect();
    if p.is_empty() || p.len() > q_chars.len() {
        return false;
    }
    q_chars.windows(p.len()).any(|w| {
        similarity_chars(w, &p, c).is_ok_and(|s| s > c.delta)
    })
}
