//! Grounding by bottom-up instantiation.
//!
//! The grounder first computes an over-approximation of the derivable atoms:
//! the least model of the program with negative bodies ignored. Rules are
//! then instantiated only with substitutions that make every positive body
//! atom one of those possible atoms. An instance with an underivable
//! positive body atom can never fire (or, for a constraint, never be
//! violated), so dropping it leaves the stable models unchanged.

use std::collections::{HashMap, HashSet};

use super::syntax::{Atom, Constant, GroundAtom, GroundProgram, GroundRule, Program, Term};

type Binding = HashMap<String, Constant>;

#[derive(Default)]
struct AtomTable {
    by_predicate: HashMap<(String, usize), Vec<GroundAtom>>,
    all: HashSet<GroundAtom>,
}

impl AtomTable {
    fn insert(&mut self, atom: GroundAtom) -> bool {
        if self.all.contains(&atom) {
            return false;
        }
        self.all.insert(atom.clone());
        self.by_predicate
            .entry((atom.predicate.clone(), atom.args.len()))
            .or_default()
            .push(atom);
        true
    }

    fn candidates(&self, atom: &Atom) -> &[GroundAtom] {
        self.by_predicate
            .get(&(atom.predicate.clone(), atom.args.len()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

fn unify(pattern: &Atom, ground: &GroundAtom, binding: &mut Binding) -> bool {
    let mut added = Vec::new();
    for (t, c) in pattern.args.iter().zip(&ground.args) {
        let ok = match t {
            Term::Const(k) => k == c,
            Term::Var(v) => match binding.get(v) {
                Some(bound) => bound == c,
                None => {
                    binding.insert(v.clone(), c.clone());
                    added.push(v.clone());
                    true
                }
            },
        };
        if !ok {
            for v in added {
                binding.remove(&v);
            }
            return false;
        }
    }
    true
}

fn substitute(atom: &Atom, binding: &Binding) -> GroundAtom {
    GroundAtom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => binding[v].clone(),
            })
            .collect(),
    }
}

/// Calls `emit` for every binding that maps all of `body` into `table`.
fn join(body: &[Atom], table: &AtomTable, binding: &mut Binding, emit: &mut dyn FnMut(&Binding)) {
    let Some((first, rest)) = body.split_first() else {
        emit(binding);
        return;
    };
    for candidate in table.candidates(first) {
        let before: Vec<String> = binding.keys().cloned().collect();
        if unify(first, candidate, binding) {
            join(rest, table, binding, emit);
            binding.retain(|k, _| before.contains(k));
        }
    }
}

/// Instantiates a safe program.
///
/// Each output rule records the index of its source rule in `origin`.
pub fn ground(program: &Program) -> GroundProgram {
    let mut possible = AtomTable::default();
    loop {
        let mut new_atoms = Vec::new();
        for rule in &program.rules {
            let Some(head) = &rule.head else { continue };
            join(&rule.pos, &possible, &mut Binding::new(), &mut |b| {
                let atom = substitute(head, b);
                if !possible.all.contains(&atom) {
                    new_atoms.push(atom);
                }
            });
        }
        let mut changed = false;
        for atom in new_atoms {
            changed |= possible.insert(atom);
        }
        if !changed {
            break;
        }
    }

    let mut rules = Vec::new();
    for (i, rule) in program.rules.iter().enumerate() {
        if let Some(ground) = GroundProgram::from_program(&Program::new(vec![rule.clone()])) {
            // already variable-free: kept verbatim
            rules.extend(ground.rules.into_iter().map(|r| GroundRule { origin: Some(i), ..r }));
            continue;
        }
        join(&rule.pos, &possible, &mut Binding::new(), &mut |b| {
            rules.push(GroundRule {
                head: rule.head.as_ref().map(|h| substitute(h, b)),
                pos: rule.pos.iter().map(|a| substitute(a, b)).collect(),
                neg: rule.neg.iter().map(|a| substitute(a, b)).collect(),
                origin: Some(i),
            });
        });
    }
    GroundProgram::new(rules)
}
