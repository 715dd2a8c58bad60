//! Reduct, least models and stable-model enumeration.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::ground::ground;
use super::syntax::{GroundAtom, GroundProgram, GroundRule, Program};

/// A ground program without negative body literals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositiveProgram {
    rules: Vec<GroundRule>,
}

impl PositiveProgram {
    /// `None` if some rule has a negative body literal.
    pub fn new(rules: Vec<GroundRule>) -> Option<Self> {
        rules
            .iter()
            .all(|r| r.neg.is_empty())
            .then_some(PositiveProgram { rules })
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }
}

/// The Gelfond–Lifschitz reduct of `program` relative to `candidate`.
///
/// Rules with a negative literal whose atom is in `candidate` are deleted;
/// the negative literals of the remaining rules are dropped.
pub fn reduct(program: &GroundProgram, candidate: &BTreeSet<GroundAtom>) -> PositiveProgram {
    PositiveProgram {
        rules: program
            .rules
            .iter()
            .filter(|r| !r.neg.iter().any(|a| candidate.contains(a)))
            .map(|r| GroundRule {
                head: r.head.clone(),
                pos: r.pos.clone(),
                neg: Vec::new(),
                origin: r.origin,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeastModel {
    pub atoms: BTreeSet<GroundAtom>,
    /// Whether some integrity constraint has its body satisfied by `atoms`.
    pub constraint_violated: bool,
}

/// Least fixpoint of the immediate-consequence operator. Constraints take no
/// part in the fixpoint; they are checked against it afterwards.
pub fn minimal_model(program: &PositiveProgram) -> LeastModel {
    let mut atoms = BTreeSet::new();
    loop {
        let mut changed = false;
        for r in &program.rules {
            if let Some(h) = &r.head {
                if !atoms.contains(h) && r.pos.iter().all(|a| atoms.contains(a)) {
                    atoms.insert(h.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let constraint_violated = program
        .rules
        .iter()
        .any(|r| r.is_constraint() && r.pos.iter().all(|a| atoms.contains(a)));
    LeastModel {
        atoms,
        constraint_violated,
    }
}

/// Whether `candidate` is a stable model of `program`: it equals the least
/// model of its own reduct and violates no constraint.
pub fn is_stable(program: &GroundProgram, candidate: &BTreeSet<GroundAtom>) -> bool {
    let least = minimal_model(&reduct(program, candidate));
    !least.constraint_violated && least.atoms == *candidate
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StableModel {
    pub atoms: BTreeSet<GroundAtom>,
}

impl StableModel {
    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    /// Atoms rendered as text, sorted as strings.
    pub fn atom_strings(&self) -> Vec<String> {
        let mut out: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        out.sort();
        out
    }

    /// One JSON line: the sorted atom strings as an array.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.atom_strings()).expect("strings serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolveResult {
    pub models: Vec<StableModel>,
    /// More models exist than were returned.
    pub truncated: bool,
}

/// Grounds `program` and enumerates its stable models.
///
/// At most `limit` models are returned, sorted by atom sequence. When the
/// program has more, `truncated` is set and the returned models are the
/// first `limit` found by the (deterministic) search.
pub fn stable_models(program: &Program, limit: usize) -> SolveResult {
    solve_ground(&ground(program), limit)
}

pub fn solve_ground(program: &GroundProgram, limit: usize) -> SolveResult {
    let solver = Solver::new(program);
    let mut found = Vec::new();
    let mut assignment = vec![None; solver.atoms.len()];
    solver.search(&mut assignment, limit.saturating_add(1), &mut found);
    let truncated = found.len() > limit;
    found.truncate(limit);
    let mut models: Vec<StableModel> = found
        .into_iter()
        .map(|atoms| StableModel {
            atoms: atoms.into_iter().map(|i| solver.atoms[i].clone()).collect(),
        })
        .collect();
    models.sort();
    debug_assert!(models.iter().all(|m| is_stable(program, &m.atoms)));
    SolveResult { models, truncated }
}

/// Whether the program has at least one stable model.
pub fn is_satisfiable(program: &GroundProgram) -> bool {
    !solve_ground(program, 1).models.is_empty()
}

struct IRule {
    head: Option<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Branch-and-propagate search over the atoms occurring negatively.
///
/// A partial assignment fixes some of those atoms. Two least models bound
/// every stable model that agrees with it: `lower` uses only rules whose
/// negative atoms are all assigned false, `upper` uses every rule without a
/// negative atom assigned true. Unassigned atoms in `lower` are forced true,
/// those outside `upper` are forced false, and contradictions prune the
/// branch. Once everything is assigned the two bounds coincide with the
/// least model of the reduct.
struct Solver {
    atoms: Vec<GroundAtom>,
    rules: Vec<IRule>,
    /// Atoms occurring in some negative body, in sorted order.
    branch: Vec<usize>,
    /// For every atom, the rules whose positive body mentions it.
    watchers: Vec<Vec<usize>>,
}

impl Solver {
    fn new(program: &GroundProgram) -> Self {
        let atoms: Vec<GroundAtom> = program.atoms().into_iter().collect();
        let index: HashMap<&GroundAtom, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let rules: Vec<IRule> = program
            .rules
            .iter()
            .map(|r| IRule {
                head: r.head.as_ref().map(|h| index[h]),
                pos: r.pos.iter().map(|a| index[a]).collect::<BTreeSet<_>>().into_iter().collect(),
                neg: r.neg.iter().map(|a| index[a]).collect(),
            })
            .collect();
        let branch: BTreeSet<usize> = rules.iter().flat_map(|r| r.neg.iter().copied()).collect();
        let mut watchers = vec![Vec::new(); atoms.len()];
        for (ri, r) in rules.iter().enumerate() {
            for &a in &r.pos {
                watchers[a].push(ri);
            }
        }
        Solver {
            atoms,
            rules,
            branch: branch.into_iter().collect(),
            watchers,
        }
    }

    /// Least model of the non-constraint rules accepted by `active`.
    fn least_model(&self, active: impl Fn(&IRule) -> bool) -> Vec<bool> {
        let mut truth = vec![false; self.atoms.len()];
        let mut missing: Vec<usize> = self.rules.iter().map(|r| r.pos.len()).collect();
        let enabled: Vec<bool> = self.rules.iter().map(|r| r.head.is_some() && active(r)).collect();
        let mut stack: Vec<usize> = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            if enabled[ri] && missing[ri] == 0 {
                let h = r.head.unwrap();
                if !truth[h] {
                    truth[h] = true;
                    stack.push(h);
                }
            }
        }
        while let Some(a) = stack.pop() {
            for &ri in &self.watchers[a] {
                missing[ri] -= 1;
                if enabled[ri] && missing[ri] == 0 {
                    let h = self.rules[ri].head.unwrap();
                    if !truth[h] {
                        truth[h] = true;
                        stack.push(h);
                    }
                }
            }
        }
        truth
    }

    fn propagate(&self, assignment: &mut [Option<bool>]) -> Option<Vec<bool>> {
        loop {
            let lower = self.least_model(|r| r.neg.iter().all(|&a| assignment[a] == Some(false)));
            let upper = self.least_model(|r| r.neg.iter().all(|&a| assignment[a] != Some(true)));
            let mut changed = false;
            for &b in &self.branch {
                match assignment[b] {
                    Some(true) if !upper[b] => return None,
                    Some(false) if lower[b] => return None,
                    None if lower[b] => {
                        assignment[b] = Some(true);
                        changed = true;
                    }
                    None if !upper[b] => {
                        assignment[b] = Some(false);
                        changed = true;
                    }
                    _ => {}
                }
            }
            let violated = self.rules.iter().any(|r| {
                r.head.is_none()
                    && r.pos.iter().all(|&a| lower[a])
                    && r.neg.iter().all(|&a| assignment[a] == Some(false))
            });
            if violated {
                return None;
            }
            if !changed {
                return Some(lower);
            }
        }
    }

    fn search(&self, assignment: &mut [Option<bool>], want: usize, found: &mut Vec<Vec<usize>>) {
        if found.len() >= want {
            return;
        }
        let mut local = assignment.to_vec();
        let Some(lower) = self.propagate(&mut local) else {
            return;
        };
        match self.branch.iter().find(|&&b| local[b].is_none()) {
            None => {
                let model: Vec<usize> = (0..self.atoms.len()).filter(|&a| lower[a]).collect();
                found.push(model);
            }
            Some(&b) => {
                for value in [true, false] {
                    let mut next = local.clone();
                    next[b] = Some(value);
                    self.search(&mut next, want, found);
                    if found.len() >= want {
                        return;
                    }
                }
            }
        }
    }
}

/// A constraint whose body holds in a candidate set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintViolation {
    #[serde(skip)]
    pub constraint: GroundRule,
    /// Positive body atoms, all present in the candidate.
    #[serde(serialize_with = "as_strings")]
    pub witness: Vec<GroundAtom>,
    /// Atoms under `not`, all absent from the candidate.
    #[serde(serialize_with = "as_strings")]
    pub absent: Vec<GroundAtom>,
}

fn as_strings<S: serde::Serializer>(atoms: &[GroundAtom], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(atoms.iter().map(|a| a.to_string()))
}

/// Every integrity constraint of `program` whose body is satisfied by
/// `candidate`, in program order.
pub fn explain_violations(program: &GroundProgram, candidate: &BTreeSet<GroundAtom>) -> Vec<ConstraintViolation> {
    program
        .rules
        .iter()
        .filter(|r| {
            r.is_constraint()
                && r.pos.iter().all(|a| candidate.contains(a))
                && !r.neg.iter().any(|a| candidate.contains(a))
        })
        .map(|r| ConstraintViolation {
            constraint: r.clone(),
            witness: r.pos.clone(),
            absent: r.neg.clone(),
        })
        .collect()
}

/// The ground rules of one derivation of `atom` in the least model of the
/// reduct relative to `model`, supporting atoms first. `None` when `atom`
/// is not in that least model.
pub fn derivation(program: &GroundProgram, model: &BTreeSet<GroundAtom>, atom: &GroundAtom) -> Option<Vec<GroundRule>> {
    let positive = reduct(program, model);
    // breadth-first rounds give every atom a derivation of minimal depth
    let mut support: HashMap<GroundAtom, usize> = HashMap::new();
    loop {
        let mut round = Vec::new();
        for (i, r) in positive.rules.iter().enumerate() {
            if let Some(h) = &r.head {
                if !support.contains_key(h) && r.pos.iter().all(|a| support.contains_key(a)) {
                    round.push((h.clone(), i));
                }
            }
        }
        if round.is_empty() {
            break;
        }
        for (h, i) in round {
            support.entry(h).or_insert(i);
        }
    }
    support.get(atom)?;
    let mut out = Vec::new();
    let mut done = BTreeSet::new();
    collect(&positive, &support, atom, &mut done, &mut out);
    // report the rules as written in the source, negative literals included
    Some(
        out.into_iter()
            .map(|i| {
                let reduced = &positive.rules[i];
                program
                    .rules
                    .iter()
                    .find(|r| r.head == reduced.head && r.pos == reduced.pos && r.origin == reduced.origin && !r.neg.iter().any(|a| model.contains(a)))
                    .cloned()
                    .unwrap_or_else(|| reduced.clone())
            })
            .collect(),
    )
}

fn collect(
    program: &PositiveProgram,
    support: &HashMap<GroundAtom, usize>,
    atom: &GroundAtom,
    done: &mut BTreeSet<GroundAtom>,
    out: &mut Vec<usize>,
) {
    if !done.insert(atom.clone()) {
        return;
    }
    let rule = support[atom];
    for a in &program.rules[rule].pos {
        collect(program, support, a, done, out);
    }
    out.push(rule);
}
