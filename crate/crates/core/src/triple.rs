//! Terms, triples and triple documents.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("term {surface:?} has no alphanumeric content")]
    EmptyTerm { surface: String },
}

/// Map a surface form to its canonical term id.
///
/// The surface is split on anything that is not alphanumeric and at
/// camelCase boundaries (`highConductivity`, `HTTPServer`), each token is
/// lowercased and the tokens are joined with `_`. Non-ASCII letters and
/// digits are kept as `u<hex>` tokens so that the id stays within
/// `[a-z0-9_]`.
///
/// ```
/// use tripleproof::canonicalize;
/// assert_eq!(canonicalize("HighConductivity").unwrap(), "high_conductivity");
/// assert_eq!(canonicalize("heart attack").unwrap(), "heart_attack");
/// assert!(canonicalize("   ").is_err());
/// ```
pub fn canonicalize(surface: &str) -> Result<String, CanonError> {
    let tokens = tokens(surface);
    if tokens.is_empty() {
        return Err(CanonError::EmptyTerm {
            surface: surface.to_string(),
        });
    }
    Ok(tokens.join("_"))
}

/// The tokens of a canonical id, i.e. its `_`-separated parts.
pub fn id_tokens(id: &str) -> impl Iterator<Item = &str> {
    id.split('_').filter(|t| !t.is_empty())
}

fn tokens(surface: &str) -> Vec<String> {
    let chars: Vec<char> = surface.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    for (i, &ch) in chars.iter().enumerate() {
        if ch.is_ascii_alphanumeric() {
            if ch.is_ascii_uppercase() && !current.is_empty() {
                let prev = chars[i - 1];
                let next_lower = chars.get(i + 1).is_some_and(|c| c.is_ascii_lowercase());
                let boundary = prev.is_ascii_lowercase()
                    || prev.is_ascii_digit()
                    || (prev.is_ascii_uppercase() && next_lower);
                if boundary {
                    out.push(std::mem::take(&mut current));
                }
            }
            current.push(ch.to_ascii_lowercase());
        } else {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            if ch.is_alphanumeric() {
                out.push(format!("u{:x}", ch as u32));
            }
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Whether `id` is already in canonical form.
pub fn is_canonical(id: &str) -> bool {
    canonicalize(id).is_ok_and(|c| c == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Concept,
    Relation,
    Attribute,
}

/// A controlled-vocabulary term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub id: String,
    pub label: String,
    pub kind: TermKind,
}

impl Term {
    /// Builds a term from its surface form; the id is the canonical form of `label`.
    pub fn from_label(label: &str, kind: TermKind) -> Result<Self, CanonError> {
        Ok(Term {
            id: canonicalize(label)?,
            label: label.to_string(),
            kind,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    #[default]
    Llm,
    Expert,
    FeatureExtractor,
}

/// A literal object, optionally carrying a unit (`"350 S/cm"`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl Literal {
    /// Splits `"<number> <unit>"` into value and unit; anything else is a
    /// plain value.
    pub fn parse(text: &str) -> Self {
        if let Some((head, rest)) = text.split_once(char::is_whitespace) {
            let unit = rest.trim();
            if !unit.is_empty() && head.parse::<f64>().is_ok() {
                return Literal {
                    value: head.to_string(),
                    unit: Some(unit.to_string()),
                };
            }
        }
        Literal {
            value: text.to_string(),
            unit: None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.unit {
            Some(unit) => write!(f, "{} {}", self.value, unit),
            None => f.write_str(&self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Object {
    Id(String),
    Literal(Literal),
}

impl Object {
    pub fn as_id(&self) -> Option<&str> {
        match self {
            Object::Id(id) => Some(id),
            Object::Literal(_) => None,
        }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Id(id) => f.write_str(id),
            Object::Literal(lit) => write!(f, "{:?}", lit.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Object,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_ref: Option<String>,
}

impl Triple {
    /// A triple between three ids, each canonicalized.
    pub fn new(subject: &str, predicate: &str, object: &str) -> Result<Self, CanonError> {
        Ok(Triple {
            subject: canonicalize(subject)?,
            predicate: canonicalize(predicate)?,
            object: Object::Id(canonicalize(object)?),
            provenance: Provenance::Llm,
            source_ref: None,
        })
    }

    pub fn with_literal(subject: &str, predicate: &str, literal: Literal) -> Result<Self, CanonError> {
        Ok(Triple {
            subject: canonicalize(subject)?,
            predicate: canonicalize(predicate)?,
            object: Object::Literal(literal),
            provenance: Provenance::Llm,
            source_ref: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

/// A set of triples plus the prefix context they were read with.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleDocument {
    pub context: BTreeMap<String, String>,
    pub triples: Vec<Triple>,
}

impl TripleDocument {
    pub fn new(triples: Vec<Triple>) -> Self {
        TripleDocument {
            context: BTreeMap::new(),
            triples,
        }
    }

    /// The same document with triples sorted by subject, predicate, object.
    pub fn canonical_order(&self) -> TripleDocument {
        let mut triples = self.triples.clone();
        triples.sort_by(|a, b| {
            (&a.subject, &a.predicate, &a.object).cmp(&(&b.subject, &b.predicate, &b.object))
        });
        TripleDocument {
            context: self.context.clone(),
            triples,
        }
    }
}
