use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::model::{ElError, TOP};
use super::normalize::{NormalAxiom, NormalizedTBox};

/// The saturated subsumption relation of a normalized TBox.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    tbox: NormalizedTBox,
    /// Subsumers of every concept, generated ones included.
    subsumers: BTreeMap<String, BTreeSet<String>>,
}

impl Classification {
    pub fn tbox(&self) -> &NormalizedTBox {
        &self.tbox
    }

    /// All pairs `(a, b)` with `a ⊑ b` where `a` is a named concept and `b`
    /// is a named concept or top.
    pub fn pairs(&self) -> BTreeSet<(String, String)> {
        self.tbox
            .named
            .iter()
            .flat_map(|a| {
                self.subsumers[a]
                    .iter()
                    .filter(|b| b.as_str() == TOP || self.tbox.named.contains(*b))
                    .map(move |b| (a.clone(), b.clone()))
            })
            .collect()
    }

    /// Like [`pairs`](Self::pairs) but including normalization concepts.
    pub fn all_pairs(&self) -> BTreeSet<(String, String)> {
        self.subsumers
            .iter()
            .filter(|(a, _)| a.as_str() != TOP)
            .flat_map(|(a, sups)| sups.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    }

    /// Whether `a ⊑ b` holds. Both must be declared concepts (or top).
    pub fn is_subsumed(&self, a: &str, b: &str) -> Result<bool, ElError> {
        for id in [a, b] {
            if id != TOP && !self.tbox.named.contains(id) {
                return Err(ElError::UnknownConcept(id.to_string()));
            }
        }
        Ok(self.subsumers[a].contains(b))
    }

    /// Named superconcepts of `a` (excluding generated ones).
    pub fn named_subsumers(&self, a: &str) -> Option<BTreeSet<String>> {
        self.subsumers.get(a).map(|sups| {
            sups.iter()
                .filter(|b| !self.tbox.generated.contains(*b))
                .cloned()
                .collect()
        })
    }
}

struct Indexed {
    names: Vec<String>,
    top: usize,
    told: Vec<Vec<usize>>,
    conj: Vec<Vec<(usize, usize)>>,
    exists: Vec<Vec<(usize, usize)>>,
    exists_sub: HashMap<(usize, usize), Vec<usize>>,
    roles: usize,
}

enum Work {
    Subsumer(usize, usize),
    Edge(usize, usize, usize),
}

/// Computes all subsumptions entailed by `tbox` with the EL completion rules.
///
/// For every concept `X` the set `S(X)` starts as `{X, ⊤}` and each role `r`
/// has an edge set `R(r)`. The rules applied until nothing changes:
///
/// 1. `A ∈ S(X)`, `A ⊑ B` gives `B ∈ S(X)`
/// 2. `A1, A2 ∈ S(X)`, `A1 ⊓ A2 ⊑ B` gives `B ∈ S(X)`
/// 3. `A ∈ S(X)`, `A ⊑ ∃r.B` gives `(X, B) ∈ R(r)`
/// 4. `(X, Y) ∈ R(r)`, `A ∈ S(Y)`, `∃r.A ⊑ B` gives `B ∈ S(X)`
pub fn classify(tbox: &NormalizedTBox) -> Classification {
    let idx = index(tbox);
    let n = idx.names.len();
    let mut subsumers: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    // predecessors[r][y] = { x | (x, y) ∈ R(r) }
    let mut predecessors: Vec<Vec<BTreeSet<usize>>> = vec![vec![BTreeSet::new(); n]; idx.roles];
    let mut queue = VecDeque::new();
    for x in 0..n {
        queue.push_back(Work::Subsumer(x, x));
        queue.push_back(Work::Subsumer(x, idx.top));
    }
    while let Some(work) = queue.pop_front() {
        match work {
            Work::Subsumer(x, a) => {
                if !subsumers[x].insert(a) {
                    continue;
                }
                for &b in &idx.told[a] {
                    queue.push_back(Work::Subsumer(x, b));
                }
                for &(other, b) in &idx.conj[a] {
                    if subsumers[x].contains(&other) {
                        queue.push_back(Work::Subsumer(x, b));
                    }
                }
                for &(r, b) in &idx.exists[a] {
                    queue.push_back(Work::Edge(x, r, b));
                }
                for (r, preds) in predecessors.iter().enumerate() {
                    if let Some(sups) = idx.exists_sub.get(&(r, a)) {
                        for &p in &preds[x] {
                            for &b in sups {
                                queue.push_back(Work::Subsumer(p, b));
                            }
                        }
                    }
                }
            }
            Work::Edge(x, r, y) => {
                if !predecessors[r][y].insert(x) {
                    continue;
                }
                for &a in &subsumers[y] {
                    if let Some(sups) = idx.exists_sub.get(&(r, a)) {
                        for &b in sups {
                            queue.push_back(Work::Subsumer(x, b));
                        }
                    }
                }
            }
        }
    }
    let subsumers = subsumers
        .into_iter()
        .enumerate()
        .map(|(x, sups)| {
            (
                idx.names[x].clone(),
                sups.into_iter().map(|a| idx.names[a].clone()).collect(),
            )
        })
        .collect();
    Classification {
        tbox: tbox.clone(),
        subsumers,
    }
}

fn index(tbox: &NormalizedTBox) -> Indexed {
    let names: Vec<String> = tbox.all_concepts().into_iter().collect();
    let id: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let roles: BTreeSet<&str> = tbox
        .roles
        .iter()
        .map(String::as_str)
        .chain(tbox.axioms.iter().filter_map(|ax| match ax {
            NormalAxiom::Existential { role, .. } | NormalAxiom::ExistentialSub { role, .. } => Some(role.as_str()),
            _ => None,
        }))
        .collect();
    let role_id: HashMap<&str, usize> = roles.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let n = names.len();
    let mut idx = Indexed {
        top: id[TOP],
        told: vec![Vec::new(); n],
        conj: vec![Vec::new(); n],
        exists: vec![Vec::new(); n],
        exists_sub: HashMap::new(),
        roles: roles.len(),
        names: Vec::new(),
    };
    for ax in &tbox.axioms {
        match ax {
            NormalAxiom::Subsumption { sub, sup } => idx.told[id[sub.as_str()]].push(id[sup.as_str()]),
            NormalAxiom::Conjunction { left, right, sup } => {
                let (l, r, s) = (id[left.as_str()], id[right.as_str()], id[sup.as_str()]);
                idx.conj[l].push((r, s));
                idx.conj[r].push((l, s));
            }
            NormalAxiom::Existential { sub, role, filler } => {
                idx.exists[id[sub.as_str()]].push((role_id[role.as_str()], id[filler.as_str()]))
            }
            NormalAxiom::ExistentialSub { role, filler, sup } => idx
                .exists_sub
                .entry((role_id[role.as_str()], id[filler.as_str()]))
                .or_default()
                .push(id[sup.as_str()]),
        }
    }
    idx.names = names;
    idx
}
