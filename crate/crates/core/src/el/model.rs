use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use crate::triple::canonicalize;

/// Id of the top concept. Reserved: ontologies may not declare it.
pub const TOP: &str = "top";
/// Prefix of concepts introduced by normalization. Reserved.
pub const GENERATED_PREFIX: &str = "gen_";

#[derive(Debug, Error)]
pub enum ElError {
    #[error("reading ontology: {0}")]
    Io(#[from] std::io::Error),
    #[error("ontology JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ontology at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("unsupported concept constructor {constructor:?} at {path}")]
    UnsupportedConstructor { path: String, constructor: String },
    #[error("{kind} {id:?} is referenced but not declared")]
    Undeclared { kind: &'static str, id: String },
    #[error("id {0:?} is reserved")]
    ReservedId(String),
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
}

fn parse_err(path: &str, message: impl Into<String>) -> ElError {
    ElError::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

/// An EL concept expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Named(String),
    And(Vec<Concept>),
    Some { role: String, filler: Box<Concept> },
}

impl Concept {
    pub fn named(id: &str) -> Concept {
        Concept::Named(canonicalize(id).expect("non-empty concept id"))
    }

    pub fn and(parts: impl IntoIterator<Item = Concept>) -> Concept {
        Concept::And(parts.into_iter().collect())
    }

    pub fn some(role: &str, filler: Concept) -> Concept {
        Concept::Some {
            role: canonicalize(role).expect("non-empty role id"),
            filler: Box::new(filler),
        }
    }

    fn visit<'a>(&'a self, concepts: &mut Vec<&'a str>, roles: &mut Vec<&'a str>) {
        match self {
            Concept::Top => {}
            Concept::Named(id) => concepts.push(id),
            Concept::And(parts) => parts.iter().for_each(|p| p.visit(concepts, roles)),
            Concept::Some { role, filler } => {
                roles.push(role);
                filler.visit(concepts, roles);
            }
        }
    }

    /// Named concepts at the top level of this expression: the expression
    /// itself, conjuncts, and the fillers of existential restrictions.
    pub fn shallow_names(&self) -> Vec<&str> {
        match self {
            Concept::Top => vec![],
            Concept::Named(id) => vec![id],
            Concept::And(parts) => parts.iter().flat_map(|p| p.shallow_names()).collect(),
            Concept::Some { filler, .. } => filler.shallow_names(),
        }
    }

    fn from_json(value: &Value, path: &str) -> Result<Concept, ElError> {
        let Value::Object(obj) = value else {
            return Err(parse_err(path, "concept expression must be an object"));
        };
        if obj.len() != 1 {
            return Err(parse_err(path, "concept expression must have exactly one constructor key"));
        }
        let (key, inner) = obj.iter().next().unwrap();
        let inner_path = format!("{path}.{key}");
        match key.as_str() {
            "named" => Ok(Concept::Named(read_id(inner, &inner_path)?)),
            "top" => match inner {
                Value::Bool(true) => Ok(Concept::Top),
                _ => Err(parse_err(&inner_path, "expected true")),
            },
            "and" => {
                let Value::Array(items) = inner else {
                    return Err(parse_err(&inner_path, "expected an array"));
                };
                if items.len() < 2 {
                    return Err(parse_err(&inner_path, "a conjunction needs at least two operands"));
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(i, item)| Concept::from_json(item, &format!("{inner_path}[{i}]")))
                    .collect::<Result<_, _>>()
                    .map(Concept::And)
            }
            "some" => {
                let Value::Object(some) = inner else {
                    return Err(parse_err(&inner_path, "expected an object with role and filler"));
                };
                let role = some
                    .get("role")
                    .ok_or_else(|| parse_err(&inner_path, "missing role"))?;
                let filler = some
                    .get("filler")
                    .ok_or_else(|| parse_err(&inner_path, "missing filler"))?;
                if some.len() != 2 {
                    return Err(parse_err(&inner_path, "unexpected keys besides role and filler"));
                }
                Ok(Concept::Some {
                    role: read_id(role, &format!("{inner_path}.role"))?,
                    filler: Box::new(Concept::from_json(filler, &format!("{inner_path}.filler"))?),
                })
            }
            other => Err(ElError::UnsupportedConstructor {
                path: path.to_string(),
                constructor: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("⊤"),
            Concept::Named(id) => f.write_str(id),
            Concept::And(parts) => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ⊓ ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            Concept::Some { role, filler } => write!(f, "∃{role}.{filler}"),
        }
    }
}

fn read_id(value: &Value, path: &str) -> Result<String, ElError> {
    match value {
        Value::String(s) => canonicalize(s).map_err(|e| parse_err(path, e.to_string())),
        _ => Err(parse_err(path, "expected an id string")),
    }
}

/// A concept inclusion `lhs ⊑ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axiom {
    pub lhs: Concept,
    pub rhs: Concept,
}

impl Axiom {
    pub fn new(lhs: Concept, rhs: Concept) -> Self {
        Axiom { lhs, rhs }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊑ {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    /// `individual : concept`
    Concept { individual: String, concept: String },
    /// `(subject, object) : role`
    Role { subject: String, role: String, object: String },
}

/// A validated EL ontology: TBox plus named-individual assertions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    concepts: BTreeSet<String>,
    roles: BTreeSet<String>,
    tbox: Vec<Axiom>,
    individuals: BTreeSet<String>,
    assertions: Vec<Assertion>,
}

impl Ontology {
    pub fn new(
        concepts: impl IntoIterator<Item = String>,
        roles: impl IntoIterator<Item = String>,
        tbox: Vec<Axiom>,
        individuals: impl IntoIterator<Item = String>,
        assertions: Vec<Assertion>,
    ) -> Result<Self, ElError> {
        let canon = |id: String| canonicalize(&id).map_err(|e| parse_err("$", e.to_string()));
        let ontology = Ontology {
            concepts: concepts.into_iter().map(canon).collect::<Result<_, _>>()?,
            roles: roles.into_iter().map(canon).collect::<Result<_, _>>()?,
            tbox,
            individuals: individuals.into_iter().map(canon).collect::<Result<_, _>>()?,
            assertions,
        };
        ontology.validate()?;
        Ok(ontology)
    }

    /// An ontology whose concept and role signature is collected from the axioms.
    pub fn from_tbox(tbox: Vec<Axiom>) -> Result<Self, ElError> {
        let mut concepts = Vec::new();
        let mut roles = Vec::new();
        for ax in &tbox {
            ax.lhs.visit(&mut concepts, &mut roles);
            ax.rhs.visit(&mut concepts, &mut roles);
        }
        let concepts: Vec<String> = concepts.into_iter().map(String::from).collect();
        let roles: Vec<String> = roles.into_iter().map(String::from).collect();
        Ontology::new(concepts, roles, tbox, Vec::new(), Vec::new())
    }

    fn validate(&self) -> Result<(), ElError> {
        for id in self.concepts.iter().chain(&self.roles).chain(&self.individuals) {
            if id == TOP || id.starts_with(GENERATED_PREFIX) {
                return Err(ElError::ReservedId(id.clone()));
            }
        }
        for ax in &self.tbox {
            let mut concepts = Vec::new();
            let mut roles = Vec::new();
            ax.lhs.visit(&mut concepts, &mut roles);
            ax.rhs.visit(&mut concepts, &mut roles);
            self.check_declared(&concepts, &roles, &[])?;
            for side in [&ax.lhs, &ax.rhs] {
                check_conjunctions(side)?;
            }
        }
        for a in &self.assertions {
            match a {
                Assertion::Concept { individual, concept } => {
                    self.check_declared(&[concept], &[], &[individual])?
                }
                Assertion::Role { subject, role, object } => {
                    self.check_declared(&[], &[role], &[subject, object])?
                }
            }
        }
        Ok(())
    }

    fn check_declared(&self, concepts: &[&str], roles: &[&str], individuals: &[&str]) -> Result<(), ElError> {
        let missing = |kind, set: &BTreeSet<String>, ids: &[&str]| {
            ids.iter()
                .find(|id| !set.contains(**id))
                .map(|id| ElError::Undeclared { kind, id: id.to_string() })
        };
        if let Some(e) = missing("concept", &self.concepts, concepts)
            .or_else(|| missing("role", &self.roles, roles))
            .or_else(|| missing("individual", &self.individuals, individuals))
        {
            return Err(e);
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ElError> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(root) = &value else {
            return Err(parse_err("$", "expected an object"));
        };
        let ids = |key: &str| -> Result<Vec<String>, ElError> {
            match root.get(key) {
                None => Ok(Vec::new()),
                Some(Value::Array(items)) => items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| read_id(v, &format!("{key}[{i}]")))
                    .collect(),
                Some(_) => Err(parse_err(key, "expected an array")),
            }
        };
        let concepts = ids("concepts")?;
        let roles = ids("roles")?;
        let individuals = ids("individuals")?;
        let mut tbox = Vec::new();
        match root.get("tbox") {
            None => {}
            Some(Value::Array(items)) => {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("tbox[{i}]");
                    let lhs = item.get("lhs").ok_or_else(|| parse_err(&path, "missing lhs"))?;
                    let rhs = item.get("rhs").ok_or_else(|| parse_err(&path, "missing rhs"))?;
                    tbox.push(Axiom {
                        lhs: Concept::from_json(lhs, &format!("{path}.lhs"))?,
                        rhs: Concept::from_json(rhs, &format!("{path}.rhs"))?,
                    });
                }
            }
            Some(_) => return Err(parse_err("tbox", "expected an array")),
        }
        let mut assertions = Vec::new();
        match root.get("assertions") {
            None => {}
            Some(Value::Array(items)) => {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("assertions[{i}]");
                    let parts = match item {
                        Value::Array(parts) => parts
                            .iter()
                            .enumerate()
                            .map(|(j, v)| read_id(v, &format!("{path}[{j}]")))
                            .collect::<Result<Vec<_>, _>>()?,
                        _ => return Err(parse_err(&path, "expected [individual, concept] or [subject, role, object]")),
                    };
                    assertions.push(match <[String; 2]>::try_from(parts) {
                        Ok([individual, concept]) => Assertion::Concept { individual, concept },
                        Err(parts) => match <[String; 3]>::try_from(parts) {
                            Ok([subject, role, object]) => Assertion::Role { subject, role, object },
                            Err(_) => {
                                return Err(parse_err(
                                    &path,
                                    "expected [individual, concept] or [subject, role, object]",
                                ))
                            }
                        },
                    });
                }
            }
            Some(_) => return Err(parse_err("assertions", "expected an array")),
        }
        Ontology::new(concepts, roles, tbox, individuals, assertions)
    }

    pub fn load(path: &Path) -> Result<Self, ElError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn concepts(&self) -> &BTreeSet<String> {
        &self.concepts
    }

    pub fn roles(&self) -> &BTreeSet<String> {
        &self.roles
    }

    pub fn tbox(&self) -> &[Axiom] {
        &self.tbox
    }

    pub fn individuals(&self) -> &BTreeSet<String> {
        &self.individuals
    }

    pub fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    /// Individuals asserted (not inferred) to belong to `concept`.
    pub fn asserted_instances(&self, concept: &str) -> BTreeSet<String> {
        self.assertions
            .iter()
            .filter_map(|a| match a {
                Assertion::Concept { individual, concept: c } if c == concept => Some(individual.clone()),
                _ => None,
            })
            .collect()
    }

    /// Concepts related to `concept` by a told axiom: direct super- and
    /// subconcepts and the fillers of existential restrictions on either side.
    pub fn direct_neighbors(&self, concept: &str) -> Result<BTreeSet<String>, ElError> {
        if !self.concepts.contains(concept) {
            return Err(ElError::UnknownConcept(concept.to_string()));
        }
        let target = Concept::Named(concept.to_string());
        let mut out = BTreeSet::new();
        for ax in &self.tbox {
            if ax.lhs == target {
                out.extend(ax.rhs.shallow_names().into_iter().map(String::from));
            }
            if ax.rhs == target {
                out.extend(ax.lhs.shallow_names().into_iter().map(String::from));
            }
        }
        out.remove(concept);
        Ok(out)
    }
}

fn check_conjunctions(c: &Concept) -> Result<(), ElError> {
    match c {
        Concept::And(parts) if parts.len() < 2 => {
            Err(parse_err("tbox", "a conjunction needs at least two operands"))
        }
        Concept::And(parts) => parts.iter().try_for_each(check_conjunctions),
        Concept::Some { filler, .. } => check_conjunctions(filler),
        _ => Ok(()),
    }
}
