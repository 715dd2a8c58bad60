//! Configuration and the end-to-end run: retrieve, prompt, complete, parse,
//! match, verify, report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::el::{classify, normalize, Classification, Ontology};
use crate::llm::{build_prompt, parse_response, Client, LlmEndpointConfig, PromptRequest};
use crate::matcher::{load_synonyms, map_document, MatchConfig};
use crate::retrieval::{assemble_context, build_index, load_corpus, Document, Index};
use crate::verify::{report, verify, KnowledgeBase, Status, VerificationReport};
use crate::vocab::Vocabulary;

fn default_k() -> usize {
    3
}

fn default_budget() -> usize {
    4000
}

fn default_model_limit() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PipelineConfig {
    pub vocabulary_path: PathBuf,
    pub ontology_path: PathBuf,
    #[serde(default)]
    pub rules_path: Option<PathBuf>,
    #[serde(default)]
    pub corpus_path: Option<PathBuf>,
    /// Ground `inst/2` and `rel/3` facts from a feature extractor.
    #[serde(default)]
    pub facts_path: Option<PathBuf>,
    /// Extra synonym table, merged with the vocabulary's synonyms.
    #[serde(default)]
    pub synonyms_path: Option<PathBuf>,
    pub llm: LlmEndpointConfig,
    #[serde(default, rename = "match")]
    pub match_config: MatchConfig,
    #[serde(default = "default_k")]
    pub retrieve_k: usize,
    #[serde(default = "default_budget")]
    pub context_budget: usize,
    #[serde(default = "default_model_limit")]
    pub model_limit: usize,
}

/// Pipeline stage names used in error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Retrieve,
    Prompt,
    Complete,
    Parse,
    Match,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Load => "load",
            Stage::Retrieve => "retrieve",
            Stage::Prompt => "prompt",
            Stage::Complete => "complete",
            Stage::Parse => "parse",
            Stage::Match => "match",
            Stage::Verify => "verify",
        })
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.source)
    }
}

impl std::error::Error for PipelineError {}

fn at<T, E: std::error::Error + Send + Sync + 'static>(stage: Stage, r: Result<T, E>) -> Result<T, PipelineError> {
    r.map_err(|e| PipelineError {
        stage,
        source: Box::new(e),
    })
}

fn load_error(message: String) -> PipelineError {
    PipelineError {
        stage: Stage::Load,
        source: message.into(),
    }
}

impl PipelineConfig {
    /// Reads a config file; relative paths are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| load_error(format!("{}: {e}", path.display())))?;
        let mut config: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| load_error(format!("{}: {e}", path.display())))?;
        config.resolve_relative_to(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    pub fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.vocabulary_path);
        fix(&mut self.ontology_path);
        for p in [
            &mut self.rules_path,
            &mut self.corpus_path,
            &mut self.facts_path,
            &mut self.synonyms_path,
            &mut self.llm.mock_path,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }
}

/// Everything a run needs, loaded and checked up front.
pub struct Loaded {
    pub config: PipelineConfig,
    pub vocabulary: Vocabulary,
    pub ontology: Ontology,
    pub classification: Classification,
    pub kb: KnowledgeBase,
    pub corpus: Vec<Document>,
    pub index: Index,
    pub synonyms: BTreeMap<String, BTreeSet<String>>,
    pub client: Client,
}

impl Loaded {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        let vocabulary = at(Stage::Load, Vocabulary::load(&config.vocabulary_path))?;
        let ontology = at(Stage::Load, Ontology::load(&config.ontology_path))?;
        let classification = classify(&normalize(&ontology));
        let mut kb = KnowledgeBase::from_ontology(&classification, &ontology);
        if let Some(p) = &config.rules_path {
            kb = at(Stage::Load, kb.with_rules_file(p))?;
        }
        if let Some(p) = &config.facts_path {
            kb = at(Stage::Load, kb.with_external_facts_file(p))?;
        }
        let corpus = match &config.corpus_path {
            Some(p) => at(Stage::Load, load_corpus(p))?,
            None => Vec::new(),
        };
        let index = at(Stage::Load, build_index(&corpus))?;
        let mut synonyms = vocabulary.synonyms().clone();
        if let Some(p) = &config.synonyms_path {
            for (id, surfaces) in at(Stage::Load, load_synonyms(p))? {
                synonyms.entry(id).or_default().extend(surfaces);
            }
        }
        at(Stage::Load, config.match_config.validate())?;
        if config.retrieve_k == 0 || config.context_budget == 0 || config.model_limit == 0 {
            return Err(load_error("retrieveK, contextBudget and modelLimit must be positive".into()));
        }
        if let Some(dir) = &config.llm.mock_path {
            if !dir.is_dir() {
                return Err(load_error(format!("mock directory {} does not exist", dir.display())));
            }
        }
        let client = at(Stage::Load, Client::new(config.llm.clone()))?;
        Ok(Loaded {
            config,
            vocabulary,
            ontology,
            classification,
            kb,
            corpus,
            index,
            synonyms,
            client,
        })
    }

    /// The prompt a query produces, after retrieval.
    pub fn prompt(&self, query: &str) -> Result<String, PipelineError> {
        let hits = self.index.retrieve(query, self.config.retrieve_k);
        let context = assemble_context(&hits, &self.corpus, self.config.context_budget);
        log::info!("retrieved {} document(s), {} context chars", hits.len(), context.chars().count());
        at(
            Stage::Prompt,
            build_prompt(&PromptRequest {
                vocabulary: &self.vocabulary,
                context: &context,
                user_query: query,
            }),
        )
    }

    pub fn run(&self, query: &str) -> Result<VerificationReport, PipelineError> {
        let prompt = self.prompt(query)?;
        let raw = at(Stage::Complete, self.client.complete(&prompt))?;
        let (doc, validation) = at(Stage::Parse, parse_response(&raw, &self.vocabulary))?;
        if !validation.ok {
            log::warn!("{} vocabulary violation(s) in the response", validation.violations.len());
        }
        let matches = at(
            Stage::Match,
            map_document(&doc, &self.ontology, &self.synonyms, None, &self.config.match_config),
        )?;
        let verdicts = at(Stage::Verify, verify(&doc.triples, &self.kb, &matches))?;
        let mut out = report(verdicts);
        out.validation = Some(validation);
        Ok(out)
    }
}

pub fn run_pipeline(config: PipelineConfig, query: &str) -> Result<VerificationReport, PipelineError> {
    Loaded::new(config)?.run(query)
}

/// 0 when every verdict is verified, 2 when any is refuted, 3 when some are
/// unknown or unmapped.
pub fn exit_status(report: &VerificationReport) -> i32 {
    let statuses: BTreeSet<Status> = report.verdicts.iter().map(|v| v.status).collect();
    if statuses.contains(&Status::Refuted) {
        2
    } else if statuses.contains(&Status::Unknown) || statuses.contains(&Status::Unmapped) {
        3
    } else {
        0
    }
}
