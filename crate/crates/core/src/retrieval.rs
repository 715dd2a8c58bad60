//! Lexical retrieval: an inverted index ranked with BM25.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::triple::canonicalize;

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;
/// Separator line between documents in an assembled context.
pub const DELIMITER: &str = "---";

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("document id {0} occurs more than once")]
    DuplicateDocId(String),
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub body: String,
}

impl Document {
    pub fn new(id: &str, title: &str, body: &str) -> Self {
        Document {
            id: id.to_string(),
            title: title.to_string(),
            body: body.to_string(),
        }
    }

    /// Canonical tokens of the title followed by those of the body.
    pub fn tokens(&self) -> Vec<String> {
        tokenize(&format!("{} {}", self.title, self.body))
    }

    /// The text placed into a context: title line, then body.
    pub fn block(&self) -> String {
        if self.title.is_empty() {
            self.body.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }
}

/// One canonical token per whitespace-separated word; words without
/// letters or digits are skipped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(|w| canonicalize(w).ok()).collect()
}

/// Reads a corpus with one `{"id","title","body"}` object per line.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>, RetrievalError> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

pub fn parse_corpus(text: &str) -> Result<Vec<Document>, RetrievalError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| RetrievalError::Json { line: i + 1, source }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Index {
    /// token → (doc id, term frequency), in corpus order.
    pub postings: BTreeMap<String, Vec<(String, usize)>>,
    pub doc_lengths: BTreeMap<String, usize>,
    pub avg_doc_length: f64,
    pub n: usize,
}

pub fn build_index(corpus: &[Document]) -> Result<Index, RetrievalError> {
    let mut index = Index::default();
    for doc in corpus {
        if index.doc_lengths.contains_key(&doc.id) {
            return Err(RetrievalError::DuplicateDocId(doc.id.clone()));
        }
        let tokens = doc.tokens();
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for t in &tokens {
            *tf.entry(t.clone()).or_default() += 1;
        }
        for (t, f) in tf {
            index.postings.entry(t).or_default().push((doc.id.clone(), f));
        }
        index.doc_lengths.insert(doc.id.clone(), tokens.len());
    }
    index.n = corpus.len();
    if index.n > 0 {
        index.avg_doc_length = index.doc_lengths.values().sum::<usize>() as f64 / index.n as f64;
    }
    Ok(index)
}

impl Index {
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.postings.get(token).map_or(0, Vec::len) as f64;
        let n = self.n as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    /// Documents sharing at least one token with `query`, best first, ties
    /// broken by id; at most `k`.
    pub fn retrieve(&self, query: &str, k: usize) -> Vec<(String, f64)> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for t in &terms {
            let Some(postings) = self.postings.get(t) else { continue };
            let idf = self.idf(t);
            for (doc, tf) in postings {
                let tf = *tf as f64;
                let dl = self.doc_lengths[doc] as f64;
                let norm = if self.avg_doc_length > 0.0 { dl / self.avg_doc_length } else { 0.0 };
                let part = idf * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * norm));
                *scores.entry(doc).or_default() += part;
            }
        }
        let mut ranked: Vec<(String, f64)> = scores.into_iter().map(|(d, s)| (d.to_string(), s)).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}

/// Anything that can rank documents for a query; a dense retriever would
/// implement this alongside [`Index`].
pub trait Retriever {
    fn retrieve(&self, query: &str, k: usize) -> Vec<(String, f64)>;
}

impl Retriever for Index {
    fn retrieve(&self, query: &str, k: usize) -> Vec<(String, f64)> {
        Index::retrieve(self, query, k)
    }
}

/// Concatenates the blocks of the ranked documents, separated by a
/// delimiter line, stopping before the first document that would push the
/// result past `budget` characters.
pub fn assemble_context(results: &[(String, f64)], corpus: &[Document], budget: usize) -> String {
    let by_id: BTreeMap<&str, &Document> = corpus.iter().map(|d| (d.id.as_str(), d)).collect();
    let separator = format!("\n{DELIMITER}\n");
    let mut out = String::new();
    let mut used = 0;
    for (id, _) in results {
        let Some(doc) = by_id.get(id.as_str()) else { continue };
        let block = doc.block();
        let extra = block.chars().count() + if out.is_empty() { 0 } else { separator.chars().count() };
        if used + extra > budget {
            break;
        }
        if !out.is_empty() {
            out.push_str(&separator);
        }
        out.push_str(&block);
        used += extra;
    }
    out
}
