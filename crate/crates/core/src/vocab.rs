//! Controlled vocabulary and validation of triples against it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::triple::{canonicalize, CanonError, Object, Term, TermKind, TripleDocument};

#[derive(Debug, Error)]
pub enum VocabularyError {
    #[error("reading vocabulary: {0}")]
    Io(#[from] std::io::Error),
    #[error("vocabulary JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Canon(#[from] CanonError),
    #[error("duplicate term id {0:?}")]
    DuplicateTerm(String),
    #[error("relationship ({0}, {1}, {2}) references an undeclared term")]
    UndeclaredRelationshipTerm(String, String, String),
    #[error("synonyms given for undeclared term {0:?}")]
    UndeclaredSynonymTerm(String),
}

/// Expert-curated terms, relationship templates and synonyms.
///
/// `individuals` lists instance identifiers (patients, samples, materials)
/// that may appear as subjects or objects without being vocabulary terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: BTreeMap<String, Term>,
    relationships: BTreeSet<(String, String, String)>,
    synonyms: BTreeMap<String, BTreeSet<String>>,
    individuals: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    id: String,
    label: String,
    kind: TermKind,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    terms: Vec<TermRecord>,
    #[serde(default)]
    relationships: Vec<[String; 3]>,
    #[serde(default)]
    synonyms: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    individuals: Vec<String>,
}

impl Vocabulary {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self, VocabularyError> {
        let mut vocab = Vocabulary::default();
        for term in terms {
            vocab.add_term(term)?;
        }
        Ok(vocab)
    }

    pub fn add_term(&mut self, mut term: Term) -> Result<(), VocabularyError> {
        term.id = canonicalize(&term.id)?;
        if self.terms.contains_key(&term.id) {
            return Err(VocabularyError::DuplicateTerm(term.id));
        }
        self.terms.insert(term.id.clone(), term);
        Ok(())
    }

    pub fn add_relationship(&mut self, s: &str, r: &str, o: &str) -> Result<(), VocabularyError> {
        let (s, r, o) = (canonicalize(s)?, canonicalize(r)?, canonicalize(o)?);
        if ![&s, &r, &o].iter().all(|id| self.terms.contains_key(*id)) {
            return Err(VocabularyError::UndeclaredRelationshipTerm(s, r, o));
        }
        self.relationships.insert((s, r, o));
        Ok(())
    }

    pub fn add_synonym(&mut self, id: &str, surface: &str) -> Result<(), VocabularyError> {
        let id = canonicalize(id)?;
        if !self.terms.contains_key(&id) {
            return Err(VocabularyError::UndeclaredSynonymTerm(id));
        }
        self.synonyms.entry(id).or_default().insert(surface.to_string());
        Ok(())
    }

    pub fn add_individual(&mut self, id: &str) -> Result<(), VocabularyError> {
        self.individuals.insert(canonicalize(id)?);
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, VocabularyError> {
        let file: VocabularyFile = serde_json::from_str(text)?;
        let mut vocab = Vocabulary::default();
        for t in file.terms {
            vocab.add_term(Term {
                id: t.id,
                label: t.label,
                kind: t.kind,
            })?;
        }
        for [s, r, o] in &file.relationships {
            vocab.add_relationship(s, r, o)?;
        }
        for (id, surfaces) in &file.synonyms {
            for surface in surfaces {
                vocab.add_synonym(id, surface)?;
            }
        }
        for id in &file.individuals {
            vocab.add_individual(id)?;
        }
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self, VocabularyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = VocabularyFile {
            terms: self
                .terms
                .values()
                .map(|t| TermRecord {
                    id: t.id.clone(),
                    label: t.label.clone(),
                    kind: t.kind,
                })
                .collect(),
            relationships: self
                .relationships
                .iter()
                .map(|(s, r, o)| [s.clone(), r.clone(), o.clone()])
                .collect(),
            synonyms: self
                .synonyms
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
            individuals: self.individuals.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("vocabulary serializes")
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in id order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.values()
    }

    pub fn term(&self, id: &str) -> Option<&Term> {
        self.terms.get(id)
    }

    pub fn relationships(&self) -> impl Iterator<Item = &(String, String, String)> {
        self.relationships.iter()
    }

    pub fn synonyms(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.synonyms
    }

    pub fn individuals(&self) -> &BTreeSet<String> {
        &self.individuals
    }

    /// Resolves an id to a declared term id, directly or through a synonym.
    pub fn resolve(&self, id: &str) -> Option<&str> {
        if let Some((key, _)) = self.terms.get_key_value(id) {
            return Some(key);
        }
        self.synonyms.iter().find_map(|(term, surfaces)| {
            surfaces
                .iter()
                .any(|s| canonicalize(s).is_ok_and(|c| c == id))
                .then_some(term.as_str())
        })
    }

    fn knows_entity(&self, id: &str) -> bool {
        self.individuals.contains(id) || self.resolve(id).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Predicate,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub triple: usize,
    pub role: Role,
    pub id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks every id of `doc` against the vocabulary.
///
/// Predicates must resolve to a term. Subjects and id objects must resolve
/// to a term or be a declared individual. Literal objects are not checked.
pub fn validate_vocabulary(doc: &TripleDocument, vocab: &Vocabulary) -> ValidationReport {
    let mut violations = Vec::new();
    for (i, t) in doc.triples.iter().enumerate() {
        if !vocab.knows_entity(&t.subject) {
            violations.push(Violation {
                triple: i,
                role: Role::Subject,
                id: t.subject.clone(),
            });
        }
        if vocab.resolve(&t.predicate).is_none() {
            violations.push(Violation {
                triple: i,
                role: Role::Predicate,
                id: t.predicate.clone(),
            });
        }
        if let Object::Id(o) = &t.object {
            if !vocab.knows_entity(o) {
                violations.push(Violation {
                    triple: i,
                    role: Role::Object,
                    id: o.clone(),
                });
            }
        }
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}
