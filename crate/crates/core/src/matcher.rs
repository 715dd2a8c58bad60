//! Term-to-ontology alignment.
//!
//! Four scores are computed per (term, concept) pair and combined with a
//! weighted sum: name similarity, neighborhood overlap, shared instances and
//! synonym lookup. [`map_document`] applies them to every term of a triple
//! document and picks one target per term.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::el::{ElError, Ontology};
use crate::triple::{canonicalize, id_tokens, Object, Term, TermKind, TripleDocument};

/// The built-in class-membership relation.
pub const IS_A: &str = "is_a";

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("the ontology declares no concepts")]
    EmptyOntology,
    #[error("unknown concept {0}")]
    UnknownConcept(String),
    #[error("invalid match configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot read synonym table: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed synonym table: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ElError> for MatchError {
    fn from(e: ElError) -> Self {
        match e {
            ElError::UnknownConcept(c) => MatchError::UnknownConcept(c),
            other => MatchError::UnknownConcept(other.to_string()),
        }
    }
}

/// Edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != cb)).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// `|a ∩ b| / |a ∪ b|`, and 1 for two empty sets.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn token_set(id: &str) -> BTreeSet<&str> {
    id_tokens(id).collect()
}

/// Name similarity of two ids: the better of normalized edit similarity
/// and token Jaccard.
pub fn name_score(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    let edit = if longest == 0 {
        1.0
    } else {
        1.0 - levenshtein(a, b) as f64 / longest as f64
    };
    edit.max(jaccard(&token_set(a), &token_set(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Name,
    Structure,
    Instance,
    Linguistic,
    Aggregate,
}

/// The four per-technique scores of one (term, concept) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TechniqueScores {
    pub name: f64,
    pub structure: f64,
    pub instance: f64,
    pub linguistic: f64,
}

impl TechniqueScores {
    pub fn new(name: f64, structure: f64, instance: f64, linguistic: f64) -> Self {
        TechniqueScores {
            name,
            structure,
            instance,
            linguistic,
        }
    }

    /// Weighted sum with weights in the order name, structure, instance,
    /// linguistic.
    pub fn aggregate(&self, weights: &[f64; 4]) -> f64 {
        let s = weights[0] * self.name
            + weights[1] * self.structure
            + weights[2] * self.instance
            + weights[3] * self.linguistic;
        s.clamp(0.0, 1.0)
    }

    /// Exact name or synonym evidence.
    pub fn is_anchor(&self) -> bool {
        self.name >= 1.0 || self.linguistic >= 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchCandidate {
    pub source_term: String,
    pub target_concept: String,
    pub technique: Technique,
    pub score: f64,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<TechniqueScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MatchConfig {
    /// Name, structure, instance, linguistic.
    pub weights: [f64; 4],
    pub accept_threshold: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            weights: [0.4, 0.2, 0.2, 0.2],
            accept_threshold: 0.75,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), MatchError> {
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MatchError::InvalidConfig("weights must be non-negative".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MatchError::InvalidConfig(format!("weights sum to {sum}, not 1")));
        }
        if !(0.0..=1.0).contains(&self.accept_threshold) {
            return Err(MatchError::InvalidConfig("acceptThreshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

fn by_score_then_id(a: &MatchCandidate, b: &MatchCandidate) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.target_concept.cmp(&b.target_concept))
}

/// Name candidates for every concept of the ontology, best first.
pub fn name_match(term: &Term, ontology: &Ontology) -> Result<Vec<MatchCandidate>, MatchError> {
    if ontology.concepts().is_empty() {
        return Err(MatchError::EmptyOntology);
    }
    let mut out: Vec<MatchCandidate> = ontology
        .concepts()
        .iter()
        .map(|c| MatchCandidate {
            source_term: term.id.clone(),
            target_concept: c.clone(),
            technique: Technique::Name,
            score: name_score(&term.id, c),
            accepted: false,
            components: None,
        })
        .collect();
    out.sort_by(by_score_then_id);
    Ok(out)
}

/// Overlap between the concepts a term co-occurs with (translated through
/// `name_map`) and the told neighbors of `concept`.
pub fn structure_match(
    triple_neighbors: &BTreeSet<String>,
    concept: &str,
    ontology: &Ontology,
    name_map: &BTreeMap<String, String>,
) -> Result<f64, MatchError> {
    let mapped: BTreeSet<String> = triple_neighbors
        .iter()
        .filter_map(|n| name_map.get(n).cloned())
        .collect();
    let neighbors = ontology.direct_neighbors(concept)?;
    Ok(jaccard(&mapped, &neighbors))
}

pub fn instance_match(instances_a: &BTreeSet<String>, instances_b: &BTreeSet<String>) -> f64 {
    jaccard(instances_a, instances_b)
}

fn canonical_surfaces(surfaces: Option<&BTreeSet<String>>) -> BTreeSet<String> {
    surfaces
        .into_iter()
        .flatten()
        .filter_map(|s| canonicalize(s).ok())
        .collect()
}

/// 1 when the term and the concept are linked by the synonym table (in
/// either direction) or are the same id, 0 otherwise.
pub fn linguistic_match(term: &Term, concept: &str, synonyms: &BTreeMap<String, BTreeSet<String>>) -> f64 {
    let mut names: BTreeSet<String> = BTreeSet::from([term.id.clone()]);
    if let Ok(label) = canonicalize(&term.label) {
        names.insert(label);
    }
    if names.contains(concept) {
        return 1.0;
    }
    if !canonical_surfaces(synonyms.get(concept)).is_disjoint(&names) {
        return 1.0;
    }
    let reverse = names
        .iter()
        .any(|n| canonical_surfaces(synonyms.get(n)).contains(concept));
    if reverse {
        1.0
    } else {
        0.0
    }
}

/// Semantic similarity supplied from outside, e.g. by an embedding model.
///
/// When present, the linguistic score becomes the larger of the synonym
/// lookup and the provider's value.
pub trait SimilarityProvider {
    /// A similarity in `[0, 1]`, or `None` when the provider has no opinion.
    fn similarity(&self, term: &Term, concept: &str) -> Option<f64>;
}

/// Evidence about a term gathered from the triples it occurs in.
#[derive(Default)]
pub struct MatchContext<'a> {
    /// Ids co-occurring with the term in some triple.
    pub neighbors: BTreeSet<String>,
    /// Accepted name matches of other terms, used to translate `neighbors`.
    pub name_map: BTreeMap<String, String>,
    /// Individuals stated to be instances of the term.
    pub instances: BTreeSet<String>,
    pub synonyms: BTreeMap<String, BTreeSet<String>>,
    pub provider: Option<&'a dyn SimilarityProvider>,
}

/// Ranks scored concepts by aggregate score and flags acceptance.
///
/// A candidate is accepted when its aggregate reaches the threshold or when
/// it is an exact name or synonym match.
pub fn rank(term: &str, scored: Vec<(String, TechniqueScores)>, config: &MatchConfig) -> Vec<MatchCandidate> {
    let mut out: Vec<MatchCandidate> = scored
        .into_iter()
        .map(|(concept, s)| {
            let score = s.aggregate(&config.weights);
            MatchCandidate {
                source_term: term.to_string(),
                target_concept: concept,
                technique: Technique::Aggregate,
                score,
                accepted: score >= config.accept_threshold || s.is_anchor(),
                components: Some(s),
            }
        })
        .collect();
    out.sort_by(by_score_then_id);
    out
}

/// All concepts ranked by aggregate score.
pub fn match_term(
    term: &Term,
    ontology: &Ontology,
    context: &MatchContext<'_>,
    config: &MatchConfig,
) -> Result<Vec<MatchCandidate>, MatchError> {
    config.validate()?;
    if ontology.concepts().is_empty() {
        return Err(MatchError::EmptyOntology);
    }
    let mut scored = Vec::new();
    for concept in ontology.concepts() {
        let mut linguistic = linguistic_match(term, concept, &context.synonyms);
        if let Some(p) = context.provider {
            if let Some(s) = p.similarity(term, concept) {
                linguistic = linguistic.max(s.clamp(0.0, 1.0));
            }
        }
        let scores = TechniqueScores {
            name: name_score(&term.id, concept),
            structure: structure_match(&context.neighbors, concept, ontology, &context.name_map)?,
            instance: instance_match(&context.instances, &ontology.asserted_instances(concept)),
            linguistic,
        };
        scored.push((concept.clone(), scores));
    }
    Ok(rank(&term.id, scored, config))
}

/// The first accepted candidate of a ranked list.
pub fn best_accepted(candidates: &[MatchCandidate]) -> Option<&MatchCandidate> {
    candidates.iter().find(|c| c.accepted)
}

/// One candidate per line.
pub fn to_json_lines(candidates: &[MatchCandidate]) -> String {
    candidates
        .iter()
        .map(|c| serde_json::to_string(c).expect("candidates serialize") + "\n")
        .collect()
}

/// Reads a synonym table: a JSON object from concept id to surface strings.
pub fn load_synonyms(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>, MatchError> {
    parse_synonyms(&std::fs::read_to_string(path)?)
}

pub fn parse_synonyms(text: &str) -> Result<BTreeMap<String, BTreeSet<String>>, MatchError> {
    let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (id, surfaces) in raw {
        let id = canonicalize(&id).map_err(|e| MatchError::InvalidConfig(e.to_string()))?;
        out.entry(id).or_default().extend(surfaces);
    }
    Ok(out)
}

/// Where a term occurs, which decides what it may be mapped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    /// Subject, or object of an ordinary relation: an individual or a concept.
    Entity,
    /// Predicate: a role or the built-in `is_a`.
    Relation,
    /// Object of `is_a`: a concept.
    Class,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TermMatch {
    pub slot: Slot,
    pub term: String,
    /// The chosen ontology id, `None` when nothing was accepted.
    pub target: Option<String>,
    pub candidates: Vec<MatchCandidate>,
}

/// Targets for every term of a document.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchMap {
    pub entries: BTreeMap<(Slot, String), TermMatch>,
}

impl MatchMap {
    pub fn target(&self, slot: Slot, term: &str) -> Option<&str> {
        self.entries.get(&(slot, term.to_string()))?.target.as_deref()
    }

    pub fn insert(&mut self, slot: Slot, term: &str, target: Option<&str>) {
        self.entries.insert(
            (slot, term.to_string()),
            TermMatch {
                slot,
                term: term.to_string(),
                target: target.map(String::from),
                candidates: Vec::new(),
            },
        );
    }

    /// Every candidate of every term, in entry order.
    pub fn candidates(&self) -> impl Iterator<Item = &MatchCandidate> {
        self.entries.values().flat_map(|m| m.candidates.iter())
    }
}

fn relation_target(
    predicate: &str,
    ontology: &Ontology,
    synonyms: &BTreeMap<String, BTreeSet<String>>,
    config: &MatchConfig,
) -> (Option<String>, Vec<MatchCandidate>) {
    if predicate == IS_A || predicate == "type" {
        return (Some(IS_A.to_string()), Vec::new());
    }
    let term = Term {
        id: predicate.to_string(),
        label: predicate.to_string(),
        kind: TermKind::Relation,
    };
    let mut candidates: Vec<MatchCandidate> = ontology
        .roles()
        .iter()
        .map(|r| {
            let name = name_score(predicate, r);
            let linguistic = linguistic_match(&term, r, synonyms);
            let (technique, score) = if linguistic > name {
                (Technique::Linguistic, linguistic)
            } else {
                (Technique::Name, name)
            };
            MatchCandidate {
                source_term: predicate.to_string(),
                target_concept: r.clone(),
                technique,
                score,
                accepted: score >= config.accept_threshold,
                components: None,
            }
        })
        .collect();
    candidates.sort_by(by_score_then_id);
    let target = best_accepted(&candidates).map(|c| c.target_concept.clone());
    (target, candidates)
}

/// Individuals are identifiers, not descriptions: only an exact id or a
/// synonym entry links a term to one.
fn individual_target(id: &str, ontology: &Ontology, synonyms: &BTreeMap<String, BTreeSet<String>>) -> Option<String> {
    if ontology.individuals().contains(id) {
        return Some(id.to_string());
    }
    ontology
        .individuals()
        .iter()
        .find(|i| {
            canonical_surfaces(synonyms.get(*i)).contains(id)
                || canonical_surfaces(synonyms.get(id)).contains(*i)
        })
        .cloned()
}

/// Maps every subject, predicate and id object of `doc` onto the ontology.
///
/// Literal objects need no mapping and are not recorded.
pub fn map_document(
    doc: &TripleDocument,
    ontology: &Ontology,
    synonyms: &BTreeMap<String, BTreeSet<String>>,
    provider: Option<&dyn SimilarityProvider>,
    config: &MatchConfig,
) -> Result<MatchMap, MatchError> {
    config.validate()?;
    let mut map = MatchMap::default();

    let mut relation_of = BTreeMap::new();
    for t in &doc.triples {
        if !relation_of.contains_key(&t.predicate) {
            let (target, candidates) = relation_target(&t.predicate, ontology, synonyms, config);
            relation_of.insert(t.predicate.clone(), target.clone());
            map.entries.insert(
                (Slot::Relation, t.predicate.clone()),
                TermMatch {
                    slot: Slot::Relation,
                    term: t.predicate.clone(),
                    target,
                    candidates,
                },
            );
        }
    }

    // (slot, id) pairs still to be mapped, with their matching evidence
    let mut pending: BTreeSet<(Slot, String)> = BTreeSet::new();
    let mut neighbors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut instances: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for t in &doc.triples {
        let is_a = relation_of[&t.predicate].as_deref() == Some(IS_A);
        pending.insert((Slot::Entity, t.subject.clone()));
        if let Object::Id(o) = &t.object {
            pending.insert((if is_a { Slot::Class } else { Slot::Entity }, o.clone()));
            neighbors.entry(t.subject.clone()).or_default().insert(o.clone());
            neighbors.entry(o.clone()).or_default().insert(t.subject.clone());
            if is_a {
                instances.entry(o.clone()).or_default().insert(t.subject.clone());
            }
        }
    }

    let mut name_map = BTreeMap::new();
    if !ontology.concepts().is_empty() {
        for (_, id) in &pending {
            let term = Term {
                id: id.clone(),
                label: id.clone(),
                kind: TermKind::Concept,
            };
            let best = &name_match(&term, ontology)?[0];
            if best.score >= config.accept_threshold {
                name_map.insert(id.clone(), best.target_concept.clone());
            }
        }
    }

    for (slot, id) in pending {
        if slot == Slot::Entity {
            if let Some(ind) = individual_target(&id, ontology, synonyms) {
                map.insert(slot, &id, Some(&ind));
                continue;
            }
        }
        if ontology.concepts().is_empty() {
            map.insert(slot, &id, None);
            continue;
        }
        let term = Term {
            id: id.clone(),
            label: id.clone(),
            kind: TermKind::Concept,
        };
        let mut own_names = name_map.clone();
        own_names.remove(&id);
        let context = MatchContext {
            neighbors: neighbors.get(&id).cloned().unwrap_or_default(),
            name_map: own_names,
            instances: instances.get(&id).cloned().unwrap_or_default(),
            synonyms: synonyms.clone(),
            provider,
        };
        let candidates = match_term(&term, ontology, &context, config)?;
        let target = best_accepted(&candidates).map(|c| c.target_concept.clone());
        map.entries.insert(
            (slot, id.clone()),
            TermMatch {
                slot,
                term: id,
                target,
                candidates,
            },
        );
    }
    Ok(map)
}
