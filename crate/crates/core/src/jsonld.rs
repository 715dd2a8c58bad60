//! Reader and writer for a flat JSON-LD subset.
//!
//! Supported: a node object or a top-level array of node objects, each with
//! an `@id`, an optional `@context` of prefix to IRI strings, `@type`, and
//! predicate keys whose values are `{"@id": ..}` references, `{"@value": ..}`
//! objects, strings, numbers, booleans, or arrays of those. Named graphs,
//! blank nodes, `@reverse`, lists and embedded nodes are rejected with the
//! JSON path of the offending construct.
//!
//! Every IRI is reduced to its local name (the part after the last `/`, `#`
//! or `:`) and canonicalized.

use std::collections::BTreeMap;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::triple::{canonicalize, Literal, Object, Provenance, Triple, TripleDocument};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonLdError {
    #[error("JSON syntax error: {0}")]
    JsonSyntax(String),
    #[error("unsupported JSON-LD feature at {path}")]
    UnsupportedFeature { path: String },
    #[error("node object without @id at {path}")]
    MissingId { path: String },
    #[error("invalid identifier {value:?} at {path}")]
    InvalidId { path: String, value: String },
    #[error("unexpected JSON structure at {path}: {message}")]
    InvalidStructure { path: String, message: String },
}

const TYPE_PREDICATE: &str = "type";

pub fn parse_jsonld(text: &str) -> Result<TripleDocument, JsonLdError> {
    let value: Value = serde_json::from_str(text).map_err(|e| JsonLdError::JsonSyntax(e.to_string()))?;
    let mut doc = TripleDocument::default();
    match &value {
        Value::Object(node) => read_node(node, "", &mut doc)?,
        Value::Array(nodes) => {
            for (i, node) in nodes.iter().enumerate() {
                let path = format!("[{i}]");
                match node {
                    Value::Object(node) => read_node(node, &path, &mut doc)?,
                    _ => return Err(structure(&path, "expected a node object")),
                }
            }
        }
        _ => return Err(structure("", "expected a node object or an array of node objects")),
    }
    Ok(doc)
}

fn join(base: &str, key: &str) -> String {
    if base.is_empty() {
        key.to_string()
    } else {
        format!("{base}.{key}")
    }
}

fn structure(path: &str, message: &str) -> JsonLdError {
    JsonLdError::InvalidStructure {
        path: if path.is_empty() { "$".into() } else { path.into() },
        message: message.into(),
    }
}

fn local_name(iri: &str) -> &str {
    iri.rsplit(['/', '#', ':']).next().unwrap_or(iri)
}

fn read_id(value: &Value, path: &str) -> Result<String, JsonLdError> {
    let Value::String(iri) = value else {
        return Err(structure(path, "@id must be a string"));
    };
    if iri.starts_with("_:") {
        return Err(JsonLdError::UnsupportedFeature { path: path.into() });
    }
    canonicalize(local_name(iri)).map_err(|_| JsonLdError::InvalidId {
        path: path.into(),
        value: iri.clone(),
    })
}

fn read_context(value: &Value, path: &str, doc: &mut TripleDocument) -> Result<(), JsonLdError> {
    let Value::Object(entries) = value else {
        return Err(JsonLdError::UnsupportedFeature { path: path.into() });
    };
    for (prefix, iri) in entries {
        let entry_path = join(path, prefix);
        let Value::String(iri) = iri else {
            return Err(JsonLdError::UnsupportedFeature { path: entry_path });
        };
        if prefix.starts_with('@') {
            return Err(JsonLdError::UnsupportedFeature { path: entry_path });
        }
        match doc.context.get(prefix) {
            Some(existing) if existing != iri => {
                return Err(structure(&entry_path, "conflicting prefix definition"))
            }
            _ => {
                doc.context.insert(prefix.clone(), iri.clone());
            }
        }
    }
    Ok(())
}

fn read_node(node: &Map<String, Value>, path: &str, doc: &mut TripleDocument) -> Result<(), JsonLdError> {
    if let Some(ctx) = node.get("@context") {
        read_context(ctx, &join(path, "@context"), doc)?;
    }
    for key in node.keys() {
        if key.starts_with('@') && !matches!(key.as_str(), "@context" | "@id" | "@type") {
            return Err(JsonLdError::UnsupportedFeature { path: join(path, key) });
        }
    }
    let has_statements = node.keys().any(|k| k != "@context" && k != "@id");
    let subject = match node.get("@id") {
        Some(id) => read_id(id, &join(path, "@id"))?,
        None if has_statements => {
            return Err(JsonLdError::MissingId {
                path: if path.is_empty() { "$".into() } else { path.into() },
            })
        }
        None => return Ok(()),
    };
    for (key, value) in node {
        if key == "@context" || key == "@id" {
            continue;
        }
        let key_path = join(path, key);
        if key == "@type" {
            let types = match value {
                Value::Array(items) => items.iter().collect(),
                single => vec![single],
            };
            for (i, ty) in types.into_iter().enumerate() {
                let object = read_id(ty, &format!("{key_path}[{i}]"))?;
                push(doc, &subject, TYPE_PREDICATE, Object::Id(object));
            }
            continue;
        }
        let predicate = canonicalize(local_name(key)).map_err(|_| JsonLdError::InvalidId {
            path: key_path.clone(),
            value: key.clone(),
        })?;
        match value {
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    let item_path = format!("{key_path}[{i}]");
                    if item.is_array() {
                        return Err(JsonLdError::UnsupportedFeature { path: item_path });
                    }
                    if let Some(object) = read_object(item, &item_path)? {
                        push(doc, &subject, &predicate, object);
                    }
                }
            }
            single => {
                if let Some(object) = read_object(single, &key_path)? {
                    push(doc, &subject, &predicate, object);
                }
            }
        }
    }
    Ok(())
}

fn push(doc: &mut TripleDocument, subject: &str, predicate: &str, object: Object) {
    doc.triples.push(Triple {
        subject: subject.to_string(),
        predicate: predicate.to_string(),
        object,
        provenance: Provenance::Llm,
        source_ref: None,
    });
}

fn read_object(value: &Value, path: &str) -> Result<Option<Object>, JsonLdError> {
    Ok(Some(match value {
        Value::Null => return Ok(None),
        Value::String(s) => Object::Literal(Literal::parse(s)),
        Value::Number(n) => Object::Literal(Literal {
            value: n.to_string(),
            unit: None,
        }),
        Value::Bool(b) => Object::Literal(Literal {
            value: b.to_string(),
            unit: None,
        }),
        Value::Object(obj) => {
            if let Some(id) = obj.get("@id") {
                if obj.len() > 1 {
                    // an embedded node with its own statements
                    return Err(JsonLdError::UnsupportedFeature { path: path.into() });
                }
                Object::Id(read_id(id, &join(path, "@id"))?)
            } else if let Some(v) = obj.get("@value") {
                if let Some(extra) = obj.keys().find(|k| *k != "@value") {
                    return Err(JsonLdError::UnsupportedFeature { path: join(path, extra) });
                }
                match v {
                    Value::String(s) => Object::Literal(Literal::parse(s)),
                    Value::Number(_) | Value::Bool(_) => Object::Literal(Literal {
                        value: v.to_string(),
                        unit: None,
                    }),
                    _ => return Err(structure(&join(path, "@value"), "expected a scalar")),
                }
            } else {
                // no @id: a blank node, or a keyword object such as @list
                let path = match obj.keys().find(|k| k.starts_with('@')) {
                    Some(k) => join(path, k),
                    None => path.to_string(),
                };
                return Err(JsonLdError::UnsupportedFeature { path });
            }
        }
        Value::Array(_) => return Err(JsonLdError::UnsupportedFeature { path: path.into() }),
    }))
}

/// Writes `doc` in the supported subset.
///
/// Triples are grouped into one node object per subject; subjects,
/// predicates and objects appear in sorted order. Ids are written with the
/// first context prefix when the context is non-empty. A document with
/// several subjects becomes a top-level array whose nodes each repeat the
/// context.
pub fn serialize_jsonld(doc: &TripleDocument) -> String {
    let prefix = doc.context.keys().next().map(String::as_str);
    let context = json(&doc.context);
    let mut by_subject: BTreeMap<&str, BTreeMap<&str, Vec<&Object>>> = BTreeMap::new();
    for t in &doc.triples {
        by_subject
            .entry(&t.subject)
            .or_default()
            .entry(&t.predicate)
            .or_default()
            .push(&t.object);
    }
    if by_subject.is_empty() {
        return format!("{{\"@context\":{context}}}");
    }
    let qualify = |id: &str| match prefix {
        Some(p) => format!("{p}:{id}"),
        None => id.to_string(),
    };
    let nodes: Vec<String> = by_subject
        .into_iter()
        .map(|(subject, predicates)| {
            let mut node = format!("{{\"@context\":{context},\"@id\":{}", json(&qualify(subject)));
            for (predicate, mut objects) in predicates {
                objects.sort();
                let rendered: Vec<String> = objects
                    .iter()
                    .map(|o| match o {
                        Object::Id(id) => format!("{{\"@id\":{}}}", json(&qualify(id))),
                        Object::Literal(lit) => json(&lit.to_string()),
                    })
                    .collect();
                let value = if rendered.len() == 1 {
                    rendered.into_iter().next().unwrap()
                } else {
                    format!("[{}]", rendered.join(","))
                };
                node.push_str(&format!(",{}:{}", json(&qualify(predicate)), value));
            }
            node.push('}');
            node
        })
        .collect();
    if nodes.len() == 1 {
        nodes.into_iter().next().unwrap()
    } else {
        format!("[{}]", nodes.join(","))
    }
}

fn json<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}
