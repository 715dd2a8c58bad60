//! Knowledge-driven verification of generated triples.
//!
//! The crate takes subject-predicate-object triples produced by a language
//! model, aligns their terms with a domain ontology, and checks them with an
//! answer set programming knowledge base. Each triple receives a verdict
//! (`verified`, `refuted`, `unknown` or `unmapped`) together with the rules or
//! constraints that justify it.
//!
//! The stages, in pipeline order:
//!
//! * [`retrieval`]: BM25 index over a document corpus, used to build context.
//! * [`llm`]: prompt construction and a minimal completion client.
//! * [`jsonld`] / [`triple`] / [`vocab`]: the triple model and its JSON-LD subset.
//! * [`matcher`]: alignment of triple terms with ontology entities.
//! * [`el`]: EL ontologies, normalization and classification.
//! * [`asp`]: parser, grounder and stable-model solver for normal programs.
//! * [`verify`]: compiles everything into one program and derives verdicts.
//! * [`pipeline`]: configuration and the end-to-end run.

pub mod asp;
pub mod el;
pub mod jsonld;
pub mod llm;
pub mod matcher;
pub mod pipeline;
pub mod retrieval;
pub mod triple;
pub mod verify;
pub mod vocab;

pub use triple::{canonicalize, Object, Provenance, Triple, TripleDocument};
