//! Verification of mapped triples against an ontology and expert rules.
//!
//! The ontology is compiled into facts over a fixed set of encoding
//! predicates plus bridge rules. Expert rules and externally extracted facts
//! are added, and every triple is then checked twice: whether its atom holds
//! in all stable models (verified) and whether asserting it leaves no stable
//! model (refuted).

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::asp::{
    check_program, derivation, explain_violations, ground, is_satisfiable, minimal_model, parse_program, reduct,
    solve_ground, Atom, Constant, GroundAtom, GroundProgram, ParseError, Program, Rule, Term as AspTerm,
};
use crate::el::{Assertion, Classification, NormalAxiom, Ontology};
use crate::matcher::{MatchMap, Slot, IS_A};
use crate::triple::{Object, Triple};
use crate::vocab::ValidationReport;

/// Encoding predicates and their arities. Expert rules may use them only
/// with these arities.
pub const RESERVED: [(&str, usize); 6] = [
    ("sub", 2),
    ("inst", 2),
    ("rel", 3),
    ("some_sub", 3),
    ("conj_sub", 3),
    ("triple", 3),
];

/// Rules shared by every knowledge base: propagation of class membership
/// along subsumption, existential and conjunction axioms, and the link from
/// ontology atoms to `triple/3`.
pub const BRIDGE_RULES: &str = "\
inst(X,C2) :- inst(X,C1), sub(C1,C2).
inst(X,C) :- rel(X,R,Y), inst(Y,D), some_sub(R,D,C).
inst(X,B) :- inst(X,A1), inst(X,A2), conj_sub(A1,A2,B).
triple(X,is_a,C) :- inst(X,C).
triple(X,R,Y) :- rel(X,R,Y).
triple(X,R,C) :- rel(X,R,Y), inst(Y,C).
";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{origin}: {source}")]
    Parse { origin: String, source: ParseError },
    #[error("{origin}: reserved predicate {predicate} must have arity {expected}")]
    ReservedPredicate {
        origin: String,
        predicate: String,
        expected: usize,
    },
    #[error("{origin}: rule {rule} is not a ground inst/2 or rel/3 fact")]
    ExternalFacts { origin: String, rule: usize },
    #[error("the knowledge base has no stable model ({} violated constraint(s))", violated.len())]
    InconsistentKnowledgeBase { violated: Vec<Citation> },
}

fn id_const(id: &str) -> Constant {
    Constant::from_id(id)
}

fn fact(predicate: &str, args: &[&str]) -> Rule {
    Rule::fact(Atom::new(predicate, args.iter().map(|a| AspTerm::Const(id_const(a))).collect()))
}

/// Facts for the classified ontology followed by [`BRIDGE_RULES`].
pub fn compile_ontology(classified: &Classification, ontology: &Ontology) -> Program {
    let mut rules = Vec::new();
    for (a, b) in classified.all_pairs() {
        rules.push(fact("sub", &[&a, &b]));
    }
    for assertion in ontology.assertions() {
        rules.push(match assertion {
            Assertion::Concept { individual, concept } => fact("inst", &[individual, concept]),
            Assertion::Role { subject, role, object } => fact("rel", &[subject, role, object]),
        });
    }
    for ax in &classified.tbox().axioms {
        match ax {
            NormalAxiom::ExistentialSub { role, filler, sup } => rules.push(fact("some_sub", &[role, filler, sup])),
            NormalAxiom::Conjunction { left, right, sup } => rules.push(fact("conj_sub", &[left, right, sup])),
            _ => {}
        }
    }
    let mut program = Program::new(rules);
    program.extend(parse_program(BRIDGE_RULES).expect("bridge rules parse"));
    program
}

fn check_reserved(program: &Program, origin: &str) -> Result<(), VerifyError> {
    for (predicate, arity) in program.signature() {
        if let Some((_, expected)) = RESERVED.iter().find(|(p, _)| *p == predicate) {
            if *expected != arity {
                return Err(VerifyError::ReservedPredicate {
                    origin: origin.to_string(),
                    predicate,
                    expected: *expected,
                });
            }
        }
    }
    Ok(())
}

/// Parses an expert rule file.
pub fn parse_rules(text: &str, origin: &str) -> Result<Program, VerifyError> {
    let program = parse_program(text).map_err(|source| VerifyError::Parse {
        origin: origin.to_string(),
        source,
    })?;
    check_reserved(&program, origin)?;
    Ok(program)
}

/// Parses a facts file from a feature extractor: ground `inst/2` and
/// `rel/3` facts only.
pub fn parse_external_facts(text: &str, origin: &str) -> Result<Program, VerifyError> {
    let program = parse_rules(text, origin)?;
    for (i, r) in program.rules.iter().enumerate() {
        let ok = r.pos.is_empty()
            && r.neg.is_empty()
            && r.head.as_ref().is_some_and(|h| {
                h.to_ground().is_some() && ((h.predicate == "inst" && h.args.len() == 2) || (h.predicate == "rel" && h.args.len() == 3))
            });
        if !ok {
            return Err(VerifyError::ExternalFacts {
                origin: origin.to_string(),
                rule: i,
            });
        }
    }
    Ok(program)
}

fn read(path: &Path) -> Result<String, VerifyError> {
    std::fs::read_to_string(path).map_err(|source| VerifyError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Compiled ontology, expert rules and extracted facts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeBase {
    pub ontology_facts: Program,
    pub domain_rules: Program,
    pub external_facts: Program,
}

impl KnowledgeBase {
    pub fn new(ontology_facts: Program) -> Self {
        KnowledgeBase {
            ontology_facts,
            ..Default::default()
        }
    }

    pub fn from_ontology(classified: &Classification, ontology: &Ontology) -> Self {
        Self::new(compile_ontology(classified, ontology))
    }

    pub fn with_rules(mut self, rules: Program) -> Result<Self, VerifyError> {
        check_reserved(&rules, "rules")?;
        self.domain_rules.extend(rules);
        self.check()?;
        Ok(self)
    }

    pub fn with_rules_file(self, path: &Path) -> Result<Self, VerifyError> {
        let rules = parse_rules(&read(path)?, &path.display().to_string())?;
        self.with_rules(rules)
    }

    pub fn with_external_facts(mut self, facts: Program) -> Result<Self, VerifyError> {
        self.external_facts.extend(facts);
        self.check()?;
        Ok(self)
    }

    pub fn with_external_facts_file(self, path: &Path) -> Result<Self, VerifyError> {
        let facts = parse_external_facts(&read(path)?, &path.display().to_string())?;
        self.with_external_facts(facts)
    }

    /// All parts as one program: ontology, then rules, then external facts.
    pub fn program(&self) -> Program {
        let mut p = self.ontology_facts.clone();
        p.extend(self.domain_rules.clone());
        p.extend(self.external_facts.clone());
        p
    }

    fn check(&self) -> Result<(), VerifyError> {
        check_program(&self.program()).map_err(|source| VerifyError::Parse {
            origin: "knowledge base".into(),
            source,
        })
    }
}

/// A triple that could not be fully mapped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnmappedTriple {
    pub index: usize,
    /// The terms without an accepted match.
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleFacts {
    /// `triple/3` atoms of the fully mapped triples, with their index.
    pub facts: Vec<(usize, GroundAtom)>,
    pub unmapped: Vec<UnmappedTriple>,
}

impl TripleFacts {
    pub fn to_program(&self) -> Program {
        Program::new(
            self.facts
                .iter()
                .map(|(_, a)| Rule::fact(Atom::new(&a.predicate, a.args.iter().cloned().map(AspTerm::Const).collect())))
                .collect(),
        )
    }
}

/// The `triple/3` atom of `t` under `matches`, or the terms lacking a match.
pub fn triple_atom(t: &Triple, matches: &MatchMap) -> Result<GroundAtom, Vec<String>> {
    let mut missing = Vec::new();
    let subject = matches.target(Slot::Entity, &t.subject);
    let predicate = matches.target(Slot::Relation, &t.predicate);
    if subject.is_none() {
        missing.push(t.subject.clone());
    }
    if predicate.is_none() {
        missing.push(t.predicate.clone());
    }
    let object = match &t.object {
        Object::Literal(lit) => Some(Constant::Str(lit.to_string())),
        Object::Id(o) => {
            let slot = if predicate == Some(IS_A) { Slot::Class } else { Slot::Entity };
            let target = matches.target(slot, o);
            if target.is_none() {
                missing.push(o.clone());
            }
            target.map(id_const)
        }
    };
    match (subject, predicate, object) {
        (Some(s), Some(p), Some(o)) if missing.is_empty() => Ok(GroundAtom::new("triple", vec![id_const(s), id_const(p), o])),
        _ => Err(missing),
    }
}

pub fn compile_triples(triples: &[Triple], matches: &MatchMap) -> TripleFacts {
    let mut out = TripleFacts::default();
    for (index, t) in triples.iter().enumerate() {
        match triple_atom(t, matches) {
            Ok(atom) => out.facts.push((index, atom)),
            Err(terms) => out.unmapped.push(UnmappedTriple { index, terms }),
        }
    }
    out
}

/// The atom whose status decides a verdict: class membership is checked on
/// `inst/2`, everything else on `triple/3`.
fn query_atom(atom: &GroundAtom) -> GroundAtom {
    match atom.args.as_slice() {
        [s, Constant::Symbol(p), o] if p == IS_A => GroundAtom::new("inst", vec![s.clone(), o.clone()]),
        _ => atom.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Refuted,
    Unknown,
    Unmapped,
}

/// A violated constraint: the rule as written, its ground instance, and
/// the body atoms that hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Citation {
    pub constraint: String,
    pub instance: String,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Explanation {
    pub derived_by: Vec<String>,
    pub violated: Vec<Citation>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub triple: Triple,
    pub status: Status,
    pub explanation: Explanation,
}

fn cite(program: &Program, ground: &GroundProgram, candidate: &BTreeSet<GroundAtom>) -> Vec<Citation> {
    explain_violations(ground, candidate)
        .into_iter()
        .map(|v| Citation {
            constraint: v
                .constraint
                .origin
                .map(|i| program.rules[i].to_string())
                .unwrap_or_else(|| v.constraint.to_string()),
            instance: v.constraint.to_string(),
            witness: v.witness.iter().map(|a| a.to_string()).collect(),
        })
        .collect()
}

fn with_rule(base: &Program, rule: Rule) -> Program {
    let mut p = base.clone();
    p.rules.push(rule);
    p
}

fn to_rule_atom(a: &GroundAtom) -> Atom {
    Atom::new(&a.predicate, a.args.iter().cloned().map(AspTerm::Const).collect())
}

/// One verdict per triple, in input order.
///
/// Fails with [`VerifyError::InconsistentKnowledgeBase`] when the knowledge
/// base alone has no stable model.
pub fn verify(triples: &[Triple], kb: &KnowledgeBase, matches: &MatchMap) -> Result<Vec<Verdict>, VerifyError> {
    if triples.is_empty() {
        return Ok(Vec::new());
    }
    let program = kb.program();
    let grounded = ground(&program);
    let Some(model) = solve_ground(&grounded, 1).models.into_iter().next() else {
        let candidate = minimal_model(&reduct(&grounded, &BTreeSet::new())).atoms;
        return Err(VerifyError::InconsistentKnowledgeBase {
            violated: cite(&program, &grounded, &candidate),
        });
    };

    let mut verdicts = Vec::with_capacity(triples.len());
    for t in triples {
        let atom = match triple_atom(t, matches) {
            Ok(atom) => query_atom(&atom),
            Err(terms) => {
                verdicts.push(Verdict {
                    triple: t.clone(),
                    status: Status::Unmapped,
                    explanation: Explanation {
                        note: Some(format!("no accepted ontology match for: {}", terms.join(", "))),
                        ..Default::default()
                    },
                });
                continue;
            }
        };
        verdicts.push(judge(t, &atom, &program, &grounded, &model.atoms));
    }
    Ok(verdicts)
}

fn judge(t: &Triple, atom: &GroundAtom, program: &Program, grounded: &GroundProgram, model: &BTreeSet<GroundAtom>) -> Verdict {
    let verdict = |status, explanation| Verdict {
        triple: t.clone(),
        status,
        explanation,
    };

    let denied = with_rule(
        program,
        Rule {
            head: None,
            pos: vec![to_rule_atom(atom)],
            neg: Vec::new(),
        },
    );
    if !is_satisfiable(&ground(&denied)) {
        let derived_by = derivation(grounded, model, atom)
            .expect("a cautious consequence lies in every stable model")
            .iter()
            .map(|r| r.to_string())
            .collect();
        return verdict(
            Status::Verified,
            Explanation {
                derived_by,
                ..Default::default()
            },
        );
    }

    let asserted = with_rule(program, Rule::fact(to_rule_atom(atom)));
    let asserted_ground = ground(&asserted);
    if !is_satisfiable(&asserted_ground) {
        let mut base = model.clone();
        base.insert(atom.clone());
        let candidate = minimal_model(&reduct(&asserted_ground, &base)).atoms;
        let violated = cite(&asserted, &asserted_ground, &candidate);
        let note = violated
            .is_empty()
            .then(|| format!("asserting {atom} leaves the knowledge base without a stable model"));
        return verdict(
            Status::Refuted,
            Explanation {
                violated,
                note,
                ..Default::default()
            },
        );
    }

    verdict(
        Status::Unknown,
        Explanation {
            note: Some(format!("{atom} is neither entailed nor contradicted by the knowledge base")),
            ..Default::default()
        },
    )
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub verified: usize,
    pub refuted: usize,
    pub unknown: usize,
    pub unmapped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub verdicts: Vec<Verdict>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn report(verdicts: Vec<Verdict>) -> VerificationReport {
    let mut summary = Summary::default();
    for v in &verdicts {
        match v.status {
            Status::Verified => summary.verified += 1,
            Status::Refuted => summary.refuted += 1,
            Status::Unknown => summary.unknown += 1,
            Status::Unmapped => summary.unmapped += 1,
        }
    }
    VerificationReport {
        verdicts,
        summary,
        validation: None,
    }
}
