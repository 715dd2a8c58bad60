use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::model::{Concept, Ontology, GENERATED_PREFIX, TOP};

/// An axiom in one of the four EL normal forms. Operands are concept ids,
/// with [`TOP`] standing for the top concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NormalAxiom {
    /// `sub ⊑ sup`
    Subsumption { sub: String, sup: String },
    /// `left ⊓ right ⊑ sup`
    Conjunction { left: String, right: String, sup: String },
    /// `sub ⊑ ∃role.filler`
    Existential { sub: String, role: String, filler: String },
    /// `∃role.filler ⊑ sup`
    ExistentialSub { role: String, filler: String, sup: String },
}

impl fmt::Display for NormalAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalAxiom::Subsumption { sub, sup } => write!(f, "{sub} ⊑ {sup}"),
            NormalAxiom::Conjunction { left, right, sup } => write!(f, "{left} ⊓ {right} ⊑ {sup}"),
            NormalAxiom::Existential { sub, role, filler } => write!(f, "{sub} ⊑ ∃{role}.{filler}"),
            NormalAxiom::ExistentialSub { role, filler, sup } => write!(f, "∃{role}.{filler} ⊑ {sup}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizedTBox {
    /// Concepts declared by the source ontology.
    pub named: BTreeSet<String>,
    /// Concepts introduced during normalization, all prefixed with `gen_`.
    pub generated: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub axioms: Vec<NormalAxiom>,
}

impl NormalizedTBox {
    /// Every concept id occurring in the TBox, named or generated, plus top.
    pub fn all_concepts(&self) -> BTreeSet<String> {
        let mut all: BTreeSet<String> = self.named.union(&self.generated).cloned().collect();
        all.insert(TOP.to_string());
        all
    }
}

struct Normalizer {
    axioms: Vec<NormalAxiom>,
    seen: HashSet<NormalAxiom>,
    generated: BTreeSet<String>,
}

impl Normalizer {
    fn emit(&mut self, ax: NormalAxiom) {
        if self.seen.insert(ax.clone()) {
            self.axioms.push(ax);
        }
    }

    fn fresh(&mut self) -> String {
        let id = format!("{GENERATED_PREFIX}{}", self.generated.len() + 1);
        self.generated.insert(id.clone());
        id
    }

    fn basic(c: &Concept) -> Option<String> {
        match c {
            Concept::Top => Some(TOP.to_string()),
            Concept::Named(id) => Some(id.clone()),
            _ => None,
        }
    }

    /// `lhs ⊑ rhs` for arbitrary expressions.
    fn axiom(&mut self, lhs: &Concept, rhs: &Concept) {
        match rhs {
            Concept::Top => {}
            Concept::Named(sup) => self.subsumed_by(lhs, sup.clone()),
            Concept::And(parts) => {
                for part in parts {
                    self.axiom(lhs, part);
                }
            }
            Concept::Some { role, filler } => {
                let sub = self.as_left_basic(lhs);
                match Self::basic(filler) {
                    Some(filler) => self.emit(NormalAxiom::Existential {
                        sub,
                        role: role.clone(),
                        filler,
                    }),
                    None => {
                        let fresh = self.fresh();
                        self.emit(NormalAxiom::Existential {
                            sub,
                            role: role.clone(),
                            filler: fresh.clone(),
                        });
                        self.axiom(&Concept::Named(fresh), filler);
                    }
                }
            }
        }
    }

    /// `lhs ⊑ sup` where `sup` is already basic.
    fn subsumed_by(&mut self, lhs: &Concept, sup: String) {
        match lhs {
            Concept::Top => self.emit(NormalAxiom::Subsumption { sub: TOP.into(), sup }),
            Concept::Named(sub) => self.emit(NormalAxiom::Subsumption { sub: sub.clone(), sup }),
            Concept::And(_) => {
                let mut operands = Vec::new();
                flatten(lhs, &mut operands);
                let operands: Vec<String> = operands.into_iter().map(|c| self.as_left_basic(c)).collect();
                let mut acc = operands[0].clone();
                for (i, next) in operands.iter().enumerate().skip(1) {
                    let target = if i + 1 == operands.len() { sup.clone() } else { self.fresh() };
                    self.emit(NormalAxiom::Conjunction {
                        left: acc,
                        right: next.clone(),
                        sup: target.clone(),
                    });
                    acc = target;
                }
                if operands.len() == 1 {
                    self.emit(NormalAxiom::Subsumption { sub: acc, sup });
                }
            }
            Concept::Some { role, filler } => {
                let filler = self.as_left_basic(filler);
                self.emit(NormalAxiom::ExistentialSub {
                    role: role.clone(),
                    filler,
                    sup,
                });
            }
        }
    }

    /// A basic concept standing for `c` on the left of an inclusion, i.e.
    /// with `c ⊑ result` emitted when `c` is complex.
    fn as_left_basic(&mut self, c: &Concept) -> String {
        match Self::basic(c) {
            Some(id) => id,
            None => {
                let fresh = self.fresh();
                self.subsumed_by(c, fresh.clone());
                fresh
            }
        }
    }
}

fn flatten<'a>(c: &'a Concept, out: &mut Vec<&'a Concept>) {
    match c {
        Concept::And(parts) => parts.iter().for_each(|p| flatten(p, out)),
        other => out.push(other),
    }
}

/// Rewrites the TBox of `ontology` into normal forms NF1–NF4.
///
/// Complex sub-expressions are replaced by fresh `gen_<n>` concepts, numbered
/// from 1 in order of introduction. The result is a conservative extension:
/// subsumptions between the original named concepts are unchanged.
pub fn normalize(ontology: &Ontology) -> NormalizedTBox {
    let mut n = Normalizer {
        axioms: Vec::new(),
        seen: HashSet::new(),
        generated: BTreeSet::new(),
    };
    for ax in ontology.tbox() {
        n.axiom(&ax.lhs, &ax.rhs);
    }
    NormalizedTBox {
        named: ontology.concepts().clone(),
        generated: n.generated,
        roles: ontology.roles().clone(),
        axioms: n.axioms,
    }
}
