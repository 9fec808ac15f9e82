//! Typed medical knowledge graph.
//!
//! A graph is a set of entities keyed by `(name, type)` plus a set of fact
//! tuples whose endpoint types are constrained per relation. The base graph
//! and every per-case subgraph share this one representation. Graphs are
//! immutable once built; all list-returning queries are ordered
//! lexicographically by name, then by entity type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("record {record}: {relation} cannot connect {head_type} -> {tail_type} ({head} -> {tail})")]
    TypeViolation {
        record: usize,
        head: String,
        head_type: EntityType,
        relation: RelationType,
        tail: String,
        tail_type: EntityType,
    },
    #[error("record {record}: entity name is empty")]
    EmptyName { record: usize },
    #[error("record {record}: self-loop on {name}")]
    SelfLoop { record: usize, name: String },
    #[error("unknown entity {0}")]
    UnknownEntity(Entity),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    Department,
    Disease,
    Symptom,
    Food,
    Check,
    Drug,
}

impl EntityType {
    pub const ALL: [EntityType; 6] = [
        EntityType::Department,
        EntityType::Disease,
        EntityType::Symptom,
        EntityType::Food,
        EntityType::Check,
        EntityType::Drug,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EntityType::Department => "Department",
            EntityType::Disease => "Disease",
            EntityType::Symptom => "Symptom",
            EntityType::Food => "Food",
            EntityType::Check => "Check",
            EntityType::Drug => "Drug",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EntityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| format!("unknown entity type {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationType {
    HasDisease,
    HasSymptom,
    NeedDrug,
    NeedCheck,
    NeedFood,
    NoFood,
}

impl RelationType {
    pub const ALL: [RelationType; 6] = [
        RelationType::HasDisease,
        RelationType::HasSymptom,
        RelationType::NeedDrug,
        RelationType::NeedCheck,
        RelationType::NeedFood,
        RelationType::NoFood,
    ];

    /// Relations that attach treatment, check and diet knowledge to a
    /// disease or symptom.
    pub const CARE: [RelationType; 4] = [
        RelationType::NeedDrug,
        RelationType::NeedCheck,
        RelationType::NeedFood,
        RelationType::NoFood,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RelationType::HasDisease => "HasDisease",
            RelationType::HasSymptom => "HasSymptom",
            RelationType::NeedDrug => "NeedDrug",
            RelationType::NeedCheck => "NeedCheck",
            RelationType::NeedFood => "NeedFood",
            RelationType::NoFood => "NoFood",
        }
    }

    pub fn head_types(self) -> &'static [EntityType] {
        match self {
            RelationType::HasDisease => &[EntityType::Department],
            RelationType::HasSymptom => &[EntityType::Disease],
            _ => &[EntityType::Disease, EntityType::Symptom],
        }
    }

    pub fn tail_type(self) -> EntityType {
        match self {
            RelationType::HasDisease => EntityType::Disease,
            RelationType::HasSymptom => EntityType::Symptom,
            RelationType::NeedDrug => EntityType::Drug,
            RelationType::NeedCheck => EntityType::Check,
            RelationType::NeedFood | RelationType::NoFood => EntityType::Food,
        }
    }

    pub fn admits(self, head: EntityType, tail: EntityType) -> bool {
        self.head_types().contains(&head) && self.tail_type() == tail
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RelationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| format!("unknown relation {s:?}"))
    }
}

/// Ordering is by name first, then type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Entity {
    pub name: String,
    pub etype: EntityType,
}

impl Entity {
    pub fn new(name: impl Into<String>, etype: EntityType) -> Self {
        Entity {
            name: name.into(),
            etype,
        }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.name, self.etype)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FactTuple {
    pub head: Entity,
    pub relation: RelationType,
    pub tail: Entity,
}

impl FactTuple {
    pub fn new(head: Entity, relation: RelationType, tail: Entity) -> Self {
        FactTuple {
            head,
            relation,
            tail,
        }
    }

    pub fn is_schema_valid(&self) -> bool {
        self.head != self.tail && self.relation.admits(self.head.etype, self.tail.etype)
    }
}

impl fmt::Display for FactTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.head, self.relation, self.tail)
    }
}

/// One raw line of a graph file, before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactRecord {
    pub head: String,
    pub head_type: EntityType,
    pub relation: RelationType,
    pub tail: String,
    pub tail_type: EntityType,
}

impl FactRecord {
    pub fn new(
        head: impl Into<String>,
        head_type: EntityType,
        relation: RelationType,
        tail: impl Into<String>,
        tail_type: EntityType,
    ) -> Self {
        FactRecord {
            head: head.into(),
            head_type,
            relation,
            tail: tail.into(),
            tail_type,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    entities: BTreeSet<Entity>,
    facts: BTreeSet<FactTuple>,
    index_by_type: BTreeMap<EntityType, Vec<Entity>>,
    adjacency: BTreeMap<(Entity, RelationType), Vec<Entity>>,
    incoming: BTreeMap<(Entity, RelationType), Vec<Entity>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GraphStats {
    pub entities: usize,
    pub facts: usize,
    pub entities_by_type: [usize; 6],
    pub facts_by_relation: [usize; 6],
}

/// Builds a validated graph from raw records. Names are trimmed, duplicate
/// facts collapse, and entities are created on first mention.
pub fn load_graph(records: &[FactRecord]) -> Result<KnowledgeGraph, GraphError> {
    let mut facts = BTreeSet::new();
    for (i, rec) in records.iter().enumerate() {
        let head = rec.head.trim();
        let tail = rec.tail.trim();
        if head.is_empty() || tail.is_empty() {
            return Err(GraphError::EmptyName { record: i });
        }
        if head == tail && rec.head_type == rec.tail_type {
            return Err(GraphError::SelfLoop {
                record: i,
                name: head.to_string(),
            });
        }
        if !rec.relation.admits(rec.head_type, rec.tail_type) {
            return Err(GraphError::TypeViolation {
                record: i,
                head: head.to_string(),
                head_type: rec.head_type,
                relation: rec.relation,
                tail: tail.to_string(),
                tail_type: rec.tail_type,
            });
        }
        facts.insert(FactTuple::new(
            Entity::new(head, rec.head_type),
            rec.relation,
            Entity::new(tail, rec.tail_type),
        ));
    }
    Ok(KnowledgeGraph::from_valid_facts(facts, BTreeSet::new()))
}

/// Parses the tab-separated graph format. Blank lines and lines starting
/// with `#` are skipped; errors carry 1-based line numbers.
pub fn parse_graph_records(text: &str) -> Result<Vec<FactRecord>, GraphError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 5 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected 5 tab-separated fields, found {}", fields.len()),
            });
        }
        let parse_err = |message: String| GraphError::Parse { line, message };
        out.push(FactRecord {
            head: fields[0].to_string(),
            head_type: fields[1].parse().map_err(parse_err)?,
            relation: fields[2].parse().map_err(parse_err)?,
            tail: fields[3].to_string(),
            tail_type: fields[4].parse().map_err(parse_err)?,
        });
    }
    Ok(out)
}

/// Parses and validates graph text. Validation errors are reported against
/// the source line rather than the record index.
pub fn load_graph_str(text: &str) -> Result<KnowledgeGraph, GraphError> {
    let records = parse_graph_records(text)?;
    let lines: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !(l.trim().is_empty() || l.starts_with('#')))
        .map(|(i, _)| i + 1)
        .collect();
    load_graph(&records).map_err(|e| {
        let (record, message) = match &e {
            GraphError::TypeViolation { record, .. }
            | GraphError::EmptyName { record }
            | GraphError::SelfLoop { record, .. } => (*record, e.to_string()),
            _ => return e,
        };
        let message = message
            .split_once(": ")
            .map(|(_, m)| m.to_string())
            .unwrap_or(message);
        GraphError::Parse {
            line: lines[record],
            message,
        }
    })
}

pub fn load_graph_file(path: impl AsRef<Path>) -> Result<KnowledgeGraph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_graph_str(&text).map_err(|e| match e {
        GraphError::Parse { line, message } => GraphError::Io {
            path: path.display().to_string(),
            message: format!("line {line}: {message}"),
        },
        other => other,
    })
}

impl KnowledgeGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Assembles a graph from facts already known to satisfy the schema,
    /// adding `extra` entities (e.g. match anchors) alongside every fact
    /// endpoint.
    pub(crate) fn from_valid_facts(facts: BTreeSet<FactTuple>, extra: BTreeSet<Entity>) -> Self {
        debug_assert!(facts.iter().all(FactTuple::is_schema_valid));
        let mut entities = extra;
        for f in &facts {
            entities.insert(f.head.clone());
            entities.insert(f.tail.clone());
        }
        let mut g = KnowledgeGraph {
            entities,
            facts,
            ..Default::default()
        };
        g.rebuild_indexes();
        g
    }

    fn rebuild_indexes(&mut self) {
        let (by_type, adjacency, incoming) = Self::build_indexes(&self.entities, &self.facts);
        self.index_by_type = by_type;
        self.adjacency = adjacency;
        self.incoming = incoming;
    }

    #[allow(clippy::type_complexity)]
    fn build_indexes(
        entities: &BTreeSet<Entity>,
        facts: &BTreeSet<FactTuple>,
    ) -> (
        BTreeMap<EntityType, Vec<Entity>>,
        BTreeMap<(Entity, RelationType), Vec<Entity>>,
        BTreeMap<(Entity, RelationType), Vec<Entity>>,
    ) {
        let mut by_type: BTreeMap<EntityType, Vec<Entity>> = BTreeMap::new();
        // BTreeSet iteration is already (name, type) ordered.
        for e in entities {
            by_type.entry(e.etype).or_default().push(e.clone());
        }
        let mut adjacency: BTreeMap<(Entity, RelationType), Vec<Entity>> = BTreeMap::new();
        let mut incoming: BTreeMap<(Entity, RelationType), Vec<Entity>> = BTreeMap::new();
        for f in facts {
            adjacency
                .entry((f.head.clone(), f.relation))
                .or_default()
                .push(f.tail.clone());
            incoming
                .entry((f.tail.clone(), f.relation))
                .or_default()
                .push(f.head.clone());
        }
        for list in adjacency.values_mut().chain(incoming.values_mut()) {
            list.sort();
        }
        (by_type, adjacency, incoming)
    }

    /// Checks every structural invariant: schema-valid facts, endpoints in
    /// the entity set, non-empty names, and indexes that match a fresh
    /// rebuild.
    pub fn validate(&self) -> Result<(), String> {
        for e in &self.entities {
            if e.name.trim().is_empty() {
                return Err(format!("empty entity name ({})", e.etype));
            }
        }
        for f in &self.facts {
            if !f.is_schema_valid() {
                return Err(format!("schema violation: {f}"));
            }
            if !self.entities.contains(&f.head) || !self.entities.contains(&f.tail) {
                return Err(format!("dangling endpoint: {f}"));
            }
        }
        if !self.indexes_consistent() {
            return Err("indexes out of sync".into());
        }
        Ok(())
    }

    pub fn indexes_consistent(&self) -> bool {
        let (by_type, adjacency, incoming) = Self::build_indexes(&self.entities, &self.facts);
        by_type == self.index_by_type && adjacency == self.adjacency && incoming == self.incoming
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.iter()
    }

    pub fn facts(&self) -> impl Iterator<Item = &FactTuple> {
        self.facts.iter()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn contains_entity(&self, e: &Entity) -> bool {
        self.entities.contains(e)
    }

    pub fn contains_fact(&self, f: &FactTuple) -> bool {
        self.facts.contains(f)
    }

    pub fn entities_of_type(&self, t: EntityType) -> &[Entity] {
        self.index_by_type.get(&t).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Tails of all facts `(e, r, _)`.
    pub fn neighbors(&self, e: &Entity, r: RelationType) -> Result<&[Entity], GraphError> {
        if !self.entities.contains(e) {
            return Err(GraphError::UnknownEntity(e.clone()));
        }
        Ok(self.tails(e, r))
    }

    /// Heads of all facts `(_, r, e)`.
    pub fn predecessors(&self, e: &Entity, r: RelationType) -> Result<&[Entity], GraphError> {
        if !self.entities.contains(e) {
            return Err(GraphError::UnknownEntity(e.clone()));
        }
        Ok(self
            .incoming
            .get(&(e.clone(), r))
            .map(Vec::as_slice)
            .unwrap_or(&[]))
    }

    pub(crate) fn tails(&self, e: &Entity, r: RelationType) -> &[Entity] {
        self.adjacency
            .get(&(e.clone(), r))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn union(&self, other: &KnowledgeGraph) -> KnowledgeGraph {
        let facts = self.facts.union(&other.facts).cloned().collect();
        let entities = self.entities.union(&other.entities).cloned().collect();
        KnowledgeGraph::from_valid_facts(facts, entities)
    }

    pub fn stats(&self) -> GraphStats {
        let mut s = GraphStats {
            entities: self.entities.len(),
            facts: self.facts.len(),
            ..Default::default()
        };
        for e in &self.entities {
            s.entities_by_type[e.etype as usize] += 1;
        }
        for f in &self.facts {
            s.facts_by_relation[f.relation as usize] += 1;
        }
        s
    }

    /// Serializes back to the tab-separated file format, one fact per line
    /// in canonical order. Entities without facts are not representable.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for f in &self.facts {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                f.head.name, f.head.etype, f.relation, f.tail.name, f.tail.etype
            ));
        }
        out
    }
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "entities\t{}", self.entities)?;
        for t in EntityType::ALL {
            writeln!(f, "  {}\t{}", t, self.entities_by_type[t as usize])?;
        }
        writeln!(f, "facts\t{}", self.facts)?;
        for r in RelationType::ALL {
            writeln!(f, "  {}\t{}", r, self.facts_by_relation[r as usize])?;
        }
        Ok(())
    }
}
