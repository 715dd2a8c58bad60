//! The EL description logic: ontologies, normalization and classification.
//!
//! Supported constructors are `top`, conjunction and existential
//! restriction. Classification runs the standard completion rules over a
//! normalized TBox and yields the full subsumption relation between named
//! concepts.

mod classify;
mod model;
mod normalize;

pub use classify::{classify, Classification};
pub use model::{Assertion, Axiom, Concept, ElError, Ontology, GENERATED_PREFIX, TOP};
pub use normalize::{normalize, NormalAxiom, NormalizedTBox};
