use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use tripleproof::asp::{parse_program, stable_models};
use tripleproof::el::{classify, normalize, Ontology};
use tripleproof::jsonld::parse_jsonld;
use tripleproof::llm::prompt_hash;
use tripleproof::matcher::{load_synonyms, map_document, match_term, to_json_lines, MatchConfig, MatchContext};
use tripleproof::pipeline::{exit_status, Loaded, PipelineConfig};
use tripleproof::retrieval::{build_index, load_corpus};
use tripleproof::triple::{Term, TermKind};
use tripleproof::verify::{report, verify, KnowledgeBase, VerificationReport};
use tripleproof::vocab::{validate_vocabulary, Vocabulary};

/// Verify generated triples against an ontology and logic rules.
#[derive(Parser)]
#[command(name = "tripleproof", version)]
struct Cli {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank ontology concepts for a term (JSON lines).
    Match {
        term: String,
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[arg(long)]
        synonyms: Option<PathBuf>,
    },
    /// Print the subsumption pairs of an ontology.
    Classify { ontology: Option<PathBuf> },
    /// Print the stable models of a program, one JSON line each.
    Solve {
        program: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Rank corpus documents for a query.
    Retrieve {
        query: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Verify the triples of a JSON-LD file.
    Verify {
        triples: PathBuf,
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        facts: Option<PathBuf>,
        #[arg(long)]
        vocabulary: Option<PathBuf>,
        #[arg(long)]
        synonyms: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole pipeline for a query.
    Run {
        query: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mock: Option<PathBuf>,
    },
    /// Print the prompt a query produces and its mock-file hash.
    Prompt { query: String },
}

/// The config file as loose JSON, so subcommands can use single fields
/// without requiring a complete pipeline configuration.
struct Settings {
    raw: serde_json::Value,
    base: PathBuf,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings {
                raw: json!({}),
                base: PathBuf::from("."),
            });
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("load: {}", path.display()))?;
        let raw = serde_json::from_str(&text).with_context(|| format!("load: {}", path.display()))?;
        Ok(Settings {
            raw,
            base: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        })
    }

    fn path(&self, flag: Option<PathBuf>, field: &str) -> Option<PathBuf> {
        flag.or_else(|| self.raw.get(field)?.as_str().map(|s| self.base.join(s)))
    }

    fn require(&self, flag: Option<PathBuf>, field: &str) -> Result<PathBuf> {
        self.path(flag, field)
            .ok_or_else(|| anyhow!("load: no {field} given (flag or config)"))
    }

    fn number(&self, flag: Option<usize>, field: &str, default: usize) -> usize {
        flag.or_else(|| self.raw.get(field)?.as_u64().map(|n| n as usize))
            .unwrap_or(default)
    }

    fn match_config(&self) -> Result<MatchConfig> {
        let config = match self.raw.get("match") {
            Some(v) => serde_json::from_value(v.clone()).context("load: match configuration")?,
            None => MatchConfig::default(),
        };
        config.validate().context("load")?;
        Ok(config)
    }

    fn synonyms(&self, flag: Option<PathBuf>) -> Result<BTreeMap<String, BTreeSet<String>>> {
        match self.path(flag, "synonymsPath") {
            Some(p) => load_synonyms(&p).with_context(|| format!("load: {}", p.display())),
            None => Ok(BTreeMap::new()),
        }
    }
}

fn load_ontology(path: &Path) -> Result<Ontology> {
    Ontology::load(path).with_context(|| format!("load: {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("write: {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report(report: &VerificationReport, out: Option<&Path>) -> Result<u8> {
    emit(&(report.to_json() + "\n"), out)?;
    Ok(exit_status(report) as u8)
}

fn pipeline_config(cli_config: Option<&Path>, mock: Option<PathBuf>) -> Result<PipelineConfig> {
    let path = cli_config.ok_or_else(|| anyhow!("load: run needs --config"))?;
    let mut config = PipelineConfig::load(path)?;
    if let Some(dir) = mock {
        config.llm.mock_path = Some(dir);
        config.llm.base_url = None;
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<u8> {
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Match {
            term,
            ontology,
            synonyms,
        } => {
            let ontology = load_ontology(&settings.require(ontology, "ontologyPath")?)?;
            let term = Term::from_label(&term, TermKind::Concept).context("match")?;
            let context = MatchContext {
                synonyms: settings.synonyms(synonyms)?,
                ..Default::default()
            };
            let candidates = match_term(&term, &ontology, &context, &settings.match_config()?).context("match")?;
            emit(&to_json_lines(&candidates), None)?;
        }
        Command::Classify { ontology } => {
            let ontology = load_ontology(&settings.require(ontology, "ontologyPath")?)?;
            let pairs: Vec<[String; 2]> = classify(&normalize(&ontology))
                .pairs()
                .into_iter()
                .map(|(a, b)| [a, b])
                .collect();
            emit(&(serde_json::to_string(&json!({ "pairs": pairs }))? + "\n"), None)?;
        }
        Command::Solve { program, limit } => {
            let text = std::fs::read_to_string(&program).with_context(|| format!("load: {}", program.display()))?;
            let parsed = parse_program(&text).with_context(|| format!("parse: {}", program.display()))?;
            let limit = settings.number(limit, "modelLimit", 100);
            if limit == 0 {
                return Err(anyhow!("solve: --limit must be positive"));
            }
            let result = stable_models(&parsed, limit);
            if result.truncated {
                log::warn!("more than {limit} stable models; output truncated");
            }
            let lines: String = result.models.iter().map(|m| m.to_json_line() + "\n").collect();
            emit(&lines, None)?;
        }
        Command::Retrieve { query, k, corpus } => {
            let corpus_path = settings.require(corpus, "corpusPath")?;
            let docs = load_corpus(&corpus_path).with_context(|| format!("load: {}", corpus_path.display()))?;
            let index = build_index(&docs).context("load")?;
            let k = settings.number(k, "retrieveK", 3);
            let hits: Vec<_> = index
                .retrieve(&query, k)
                .into_iter()
                .map(|(id, score)| json!({ "id": id, "score": score }))
                .collect();
            emit(&(serde_json::to_string(&hits)? + "\n"), None)?;
        }
        Command::Verify {
            triples,
            ontology,
            rules,
            facts,
            vocabulary,
            synonyms,
            out,
        } => {
            let ontology = load_ontology(&settings.require(ontology, "ontologyPath")?)?;
            let mut kb = KnowledgeBase::from_ontology(&classify(&normalize(&ontology)), &ontology);
            if let Some(p) = settings.path(rules, "rulesPath") {
                kb = kb.with_rules_file(&p).context("load")?;
            }
            if let Some(p) = settings.path(facts, "factsPath") {
                kb = kb.with_external_facts_file(&p).context("load")?;
            }
            let text = std::fs::read_to_string(&triples).with_context(|| format!("load: {}", triples.display()))?;
            let doc = parse_jsonld(&text).with_context(|| format!("parse: {}", triples.display()))?;
            let mut synonyms_map = settings.synonyms(synonyms)?;
            let vocab = match settings.path(vocabulary, "vocabularyPath") {
                Some(p) => Some(Vocabulary::load(&p).with_context(|| format!("load: {}", p.display()))?),
                None => None,
            };
            if let Some(v) = &vocab {
                for (id, surfaces) in v.synonyms() {
                    synonyms_map.entry(id.clone()).or_default().extend(surfaces.iter().cloned());
                }
            }
            let matches =
                map_document(&doc, &ontology, &synonyms_map, None, &settings.match_config()?).context("match")?;
            let verdicts = verify(&doc.triples, &kb, &matches).context("verify")?;
            let mut out_report = report(verdicts);
            out_report.validation = vocab.map(|v| validate_vocabulary(&doc, &v));
            return emit_report(&out_report, out.as_deref());
        }
        Command::Run { query, out, mock } => {
            let config = pipeline_config(cli.config.as_deref(), mock)?;
            let result = Loaded::new(config)?.run(&query)?;
            return emit_report(&result, out.as_deref());
        }
        Command::Prompt { query } => {
            let config = pipeline_config(cli.config.as_deref(), None)?;
            let prompt = Loaded::new(config)?.prompt(&query)?;
            let body = json!({ "hash": prompt_hash(&prompt), "prompt": prompt });
            emit(&(serde_json::to_string_pretty(&body)? + "\n"), None)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
