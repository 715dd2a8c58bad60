//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tripleproof::asp::{
    parse_program, solve_ground, stable_models, Atom, Constant, GroundAtom, GroundProgram, GroundRule, Program, Rule,
    Term,
};
use tripleproof::el::{classify, normalize, Axiom, Concept, Ontology, TOP};
use tripleproof::jsonld::{parse_jsonld, serialize_jsonld};
use tripleproof::matcher::{jaccard, levenshtein, MatchMap, Slot, IS_A};
use tripleproof::pipeline::{Loaded, PipelineConfig};
use tripleproof::retrieval::{build_index, Document};
use tripleproof::triple::Literal;
use tripleproof::verify::{verify, Status};
use tripleproof::{Object, Provenance, Triple, TripleDocument};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// 1. stable models against brute-force enumeration

struct PropRule {
    head: Option<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

fn random_ground_program(r: &mut ChaCha8Rng) -> (usize, Vec<PropRule>) {
    let n = r.random_range(1..=12);
    let m = r.random_range(0..=15);
    let rules = (0..m)
        .map(|_| PropRule {
            head: r.random_bool(0.85).then(|| r.random_range(0..n)),
            pos: (0..r.random_range(0..=2)).map(|_| r.random_range(0..n)).collect(),
            neg: (0..r.random_range(0..=2)).map(|_| r.random_range(0..n)).collect(),
        })
        .collect();
    (n, rules)
}

fn brute_force(n: usize, rules: &[PropRule]) -> BTreeSet<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let holds = |a: usize| mask & (1 << a) != 0;
        let kept: Vec<&PropRule> = rules.iter().filter(|r| r.neg.iter().all(|&a| !holds(a))).collect();
        let mut least = 0u32;
        loop {
            let before = least;
            for r in &kept {
                if let Some(h) = r.head {
                    if r.pos.iter().all(|&a| least & (1 << a) != 0) {
                        least |= 1 << h;
                    }
                }
            }
            if least == before {
                break;
            }
        }
        let violated = kept
            .iter()
            .any(|r| r.head.is_none() && r.pos.iter().all(|&a| least & (1 << a) != 0));
        if least == mask && !violated {
            out.insert((0..n).filter(|&a| holds(a)).map(|a| format!("a{a}")).collect());
        }
    }
    out
}

fn to_program(rules: &[PropRule]) -> Program {
    let atom = |i: usize| Atom::new(&format!("a{i}"), Vec::new());
    Program::new(
        rules
            .iter()
            .map(|r| Rule {
                head: r.head.map(atom),
                pos: r.pos.iter().copied().map(atom).collect(),
                neg: r.neg.iter().copied().map(atom).collect(),
            })
            .collect(),
    )
}

fn asp_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let programs = 600;
    for i in 0..programs {
        let (n, rules) = random_ground_program(&mut r);
        let expected = brute_force(n, &rules);
        let result = stable_models(&to_program(&rules), 1 << 13);
        check(!result.truncated, || format!("program {i}: truncated"))?;
        let got: BTreeSet<BTreeSet<String>> = result
            .models
            .iter()
            .map(|m| m.atom_strings().into_iter().collect())
            .collect();
        check(got.len() == result.models.len(), || format!("program {i}: duplicate models"))?;
        check(got == expected, || format!("program {i}: {got:?} != {expected:?}\n{}", to_program(&rules)))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{programs} programs, {secs:.2} s"))
}

// 2. pruned grounding against naive full instantiation

const PREDICATES: [(&str, usize); 4] = [("p", 1), ("q", 2), ("r", 1), ("s", 2)];

fn random_term(r: &mut ChaCha8Rng, vars: &[&str], consts: &[&str]) -> Term {
    if !vars.is_empty() && r.random_bool(0.6) {
        Term::Var(vars.choose(r).unwrap().to_string())
    } else {
        Term::Const(Constant::Symbol(consts.choose(r).unwrap().to_string()))
    }
}

fn random_atom(r: &mut ChaCha8Rng, vars: &[&str], consts: &[&str]) -> Atom {
    let (p, arity) = *PREDICATES.choose(r).unwrap();
    Atom::new(p, (0..arity).map(|_| random_term(r, vars, consts)).collect())
}

fn random_safe_program(r: &mut ChaCha8Rng) -> Program {
    let consts = &["a", "b", "c"][..r.random_range(1..=3)];
    let mut rules = Vec::new();
    for _ in 0..r.random_range(1..=5) {
        rules.push(Rule::fact(random_atom(r, &[], consts)));
    }
    for _ in 0..r.random_range(1..=5) {
        let vars = &["X", "Y"][..r.random_range(0..=2)];
        let pos: Vec<Atom> = (0..r.random_range(1..=2)).map(|_| random_atom(r, vars, consts)).collect();
        let bound: Vec<&str> = vars
            .iter()
            .copied()
            .filter(|v| pos.iter().any(|a| a.variables().any(|x| x == *v)))
            .collect();
        let head = r.random_bool(0.85).then(|| random_atom(r, &bound, consts));
        let neg = (0..r.random_range(0..=1)).map(|_| random_atom(r, &bound, consts)).collect();
        rules.push(Rule { head, pos, neg });
    }
    Program::new(rules)
}

fn substitute(atom: &Atom, binding: &BTreeMap<&str, Constant>) -> GroundAtom {
    GroundAtom::new(
        &atom.predicate,
        atom.args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => binding[v.as_str()].clone(),
            })
            .collect(),
    )
}

fn naive_ground(program: &Program) -> GroundProgram {
    let universe: BTreeSet<Constant> = program
        .rules
        .iter()
        .flat_map(|r| r.head.iter().chain(&r.pos).chain(&r.neg))
        .flat_map(|a| a.args.iter())
        .filter_map(|t| match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(_) => None,
        })
        .collect();
    let universe: Vec<Constant> = universe.into_iter().collect();
    let mut out = Vec::new();
    for (i, rule) in program.rules.iter().enumerate() {
        let vars: Vec<&str> = rule
            .head
            .iter()
            .chain(&rule.pos)
            .chain(&rule.neg)
            .flat_map(|a| a.variables())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let total = universe.len().pow(vars.len() as u32);
        for mut code in 0..total {
            let mut binding = BTreeMap::new();
            for v in &vars {
                binding.insert(*v, universe[code % universe.len()].clone());
                code /= universe.len();
            }
            out.push(GroundRule {
                head: rule.head.as_ref().map(|h| substitute(h, &binding)),
                pos: rule.pos.iter().map(|a| substitute(a, &binding)).collect(),
                neg: rule.neg.iter().map(|a| substitute(a, &binding)).collect(),
                origin: Some(i),
            });
        }
    }
    GroundProgram::new(out)
}

fn grounding_soundness() -> Outcome {
    let mut r = rng(2);
    let programs = 250;
    let mut total_models = 0;
    for i in 0..programs {
        let program = random_safe_program(&mut r);
        check(program.rules.iter().all(|x| x.unsafe_variable().is_none()), || {
            format!("program {i} is unsafe")
        })?;
        let pruned = stable_models(&program, 1 << 14);
        let naive = solve_ground(&naive_ground(&program), 1 << 14);
        check(!pruned.truncated && !naive.truncated, || format!("program {i}: truncated"))?;
        let a: BTreeSet<_> = pruned.models.into_iter().collect();
        let b: BTreeSet<_> = naive.models.into_iter().collect();
        check(a == b, || format!("program {i}:\n{program}"))?;
        total_models += a.len();
    }
    Ok(format!("{programs} programs, {total_models} models compared"))
}

// 3. EL classification

fn closure(n: usize, edges: &[(usize, usize)]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for start in 0..n {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(x) = queue.pop_front() {
            out.insert((format!("c{start}"), format!("c{x}")));
            for &(a, b) in edges {
                if a == x && !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        out.insert((format!("c{start}"), TOP.to_string()));
    }
    out
}

fn nontrivial(pairs: BTreeSet<(String, String)>) -> BTreeSet<(String, String)> {
    pairs.into_iter().filter(|(a, b)| a != b && b != TOP).collect()
}

fn named(id: &str) -> Concept {
    Concept::named(id)
}

fn sub(lhs: Concept, rhs: Concept) -> Axiom {
    Axiom::new(lhs, rhs)
}

type Case = (&'static str, Vec<Axiom>, Vec<(&'static str, &'static str)>);

fn handcrafted() -> Vec<Case> {
    let some = Concept::some;
    let and = |a: &str, b: &str| Concept::and([named(a), named(b)]);
    vec![
        (
            "existential then filler subsumption",
            vec![sub(named("a"), some("r", named("b"))), sub(named("b"), named("c")), sub(some("r", named("c")), named("d"))],
            vec![("a", "d"), ("b", "c")],
        ),
        (
            "direct existential match",
            vec![sub(named("a"), some("r", named("b"))), sub(some("r", named("b")), named("c"))],
            vec![("a", "c")],
        ),
        (
            "different role does not fire",
            vec![sub(named("a"), some("r", named("b"))), sub(some("s", named("b")), named("c"))],
            vec![],
        ),
        (
            "existential with top filler",
            vec![sub(named("a"), some("r", named("b"))), sub(some("r", Concept::Top), named("c"))],
            vec![("a", "c")],
        ),
        (
            "two existential steps",
            vec![
                sub(named("a"), some("r", named("b"))),
                sub(named("b"), some("r", named("c"))),
                sub(some("r", named("c")), named("d")),
                sub(some("r", named("d")), named("e")),
            ],
            vec![("b", "d"), ("a", "e")],
        ),
        (
            "conjunction on the left",
            vec![sub(named("a"), named("b")), sub(named("a"), named("c")), sub(and("b", "c"), named("d"))],
            vec![("a", "b"), ("a", "c"), ("a", "d")],
        ),
        (
            "conjunctive filler on the right",
            vec![sub(named("a"), some("r", and("b", "c"))), sub(some("r", named("b")), named("d"))],
            vec![("a", "d")],
        ),
        (
            "separate successors do not combine",
            vec![
                sub(some("r", and("b", "c")), named("d")),
                sub(named("a"), some("r", named("b"))),
                sub(named("a"), some("r", named("c"))),
            ],
            vec![],
        ),
        (
            "nested existential on the left",
            vec![
                sub(named("a"), some("r", named("b"))),
                sub(named("b"), some("r", named("c"))),
                sub(some("r", some("r", named("c"))), named("d")),
            ],
            vec![("a", "d")],
        ),
        (
            "equivalent fillers",
            vec![
                sub(named("a"), named("b")),
                sub(named("b"), named("a")),
                sub(some("r", named("a")), named("c")),
                sub(named("d"), some("r", named("b"))),
            ],
            vec![("a", "b"), ("b", "a"), ("d", "c")],
        ),
        (
            "top on the left",
            vec![sub(Concept::Top, named("a")), sub(named("b"), named("c"))],
            vec![("b", "a"), ("b", "c"), ("c", "a")],
        ),
        (
            "existential inside a conjunction",
            vec![
                sub(named("a"), some("r", named("b"))),
                sub(named("c"), named("b")),
                sub(Concept::and([some("r", named("b")), named("e")]), named("f")),
                sub(named("a"), named("e")),
            ],
            vec![("a", "e"), ("a", "f"), ("c", "b")],
        ),
    ]
}

fn el_oracle() -> Outcome {
    let mut r = rng(3);
    let tboxes = 250;
    for i in 0..tboxes {
        let n = r.random_range(1..=12);
        let edges: Vec<(usize, usize)> = (0..r.random_range(0..=2 * n))
            .map(|_| (r.random_range(0..n), r.random_range(0..n)))
            .collect();
        let tbox = edges
            .iter()
            .map(|&(a, b)| sub(named(&format!("c{a}")), named(&format!("c{b}"))))
            .collect();
        let ontology = Ontology::new((0..n).map(|c| format!("c{c}")), Vec::<String>::new(), tbox, Vec::<String>::new(), Vec::new())
            .map_err(|e| format!("tbox {i}: {e}"))?;
        let got = classify(&normalize(&ontology)).pairs();
        let expected = closure(n, &edges);
        check(got == expected, || format!("tbox {i} {edges:?}: {got:?} != {expected:?}"))?;
    }
    let cases = handcrafted();
    for (name, axioms, expected) in &cases {
        let ontology = Ontology::from_tbox(axioms.clone()).map_err(|e| format!("{name}: {e}"))?;
        let got = nontrivial(classify(&normalize(&ontology)).pairs());
        let expected: BTreeSet<(String, String)> = expected.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        check(got == expected, || format!("{name}: {got:?} != {expected:?}"))?;
    }
    Ok(format!("{tboxes} random TBoxes, {} handcrafted cases", cases.len()))
}

// 4. string metrics

fn dp_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    d[0] = (0..=b.len()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

fn random_string(r: &mut ChaCha8Rng) -> String {
    const ALPHABET: [char; 6] = ['a', 'b', 'c', 'd', 'é', 'ß'];
    (0..r.random_range(0..=12)).map(|_| *ALPHABET.choose(r).unwrap()).collect()
}

fn metric_properties() -> Outcome {
    let mut r = rng(4);
    let pairs = 1500;
    for _ in 0..pairs {
        let (a, b, c) = (random_string(&mut r), random_string(&mut r), random_string(&mut r));
        let d = levenshtein(&a, &b);
        let (la, lb) = (a.chars().count(), b.chars().count());
        check(d == dp_distance(&a, &b), || format!("{a:?} {b:?}: {d}"))?;
        check(d == levenshtein(&b, &a), || format!("asymmetric on {a:?} {b:?}"))?;
        check(levenshtein(&a, &a) == 0, || format!("identity on {a:?}"))?;
        check((d == 0) == (a == b), || format!("zero distance on {a:?} {b:?}"))?;
        check(la.abs_diff(lb) <= d && d <= la.max(lb), || format!("bounds on {a:?} {b:?}"))?;
        check(levenshtein(&a, &c) <= d + levenshtein(&b, &c), || format!("triangle on {a:?} {b:?} {c:?}"))?;
    }
    let sets = 500;
    for _ in 0..sets {
        let mut pick = || -> BTreeSet<u8> { (0..r.random_range(0..6)).map(|_| r.random_range(0..8)).collect() };
        let (a, b) = (pick(), pick());
        let j = jaccard(&a, &b);
        let expected = if a.is_empty() && b.is_empty() {
            1.0
        } else {
            a.intersection(&b).count() as f64 / a.union(&b).count() as f64
        };
        check((0.0..=1.0).contains(&j), || format!("range on {a:?} {b:?}"))?;
        check(j == jaccard(&b, &a), || format!("asymmetric on {a:?} {b:?}"))?;
        check(j == expected, || format!("{a:?} {b:?}: {j} != {expected}"))?;
        check(jaccard(&a, &a) == 1.0, || format!("self on {a:?}"))?;
        check((j == 1.0) == (a == b), || format!("one iff equal on {a:?} {b:?}"))?;
    }
    Ok(format!("{pairs} string triples, {sets} set pairs"))
}

// 5. round trips

fn random_id(r: &mut ChaCha8Rng) -> String {
    const HEADS: [&str; 6] = ["graphene", "patient", "x", "high", "cell", "node"];
    const TAILS: [&str; 5] = ["a", "conductivity", "1", "b2", "type"];
    let mut id = HEADS.choose(r).unwrap().to_string();
    for _ in 0..r.random_range(0..=2) {
        id.push('_');
        id.push_str(TAILS.choose(r).unwrap());
    }
    id
}

fn random_object(r: &mut ChaCha8Rng) -> Object {
    match r.random_range(0..3) {
        0 => Object::Id(random_id(r)),
        1 => Object::Literal(Literal::parse(["plain text", "Lithium", "very high value"].choose(r).unwrap())),
        _ => Object::Literal(Literal {
            value: r.random_range(0..5000).to_string(),
            unit: r.random_bool(0.5).then(|| ["mAh", "V", "%", "S/m"].choose(r).unwrap().to_string()),
        }),
    }
}

fn random_document(r: &mut ChaCha8Rng) -> TripleDocument {
    let mut doc = TripleDocument::new(
        (0..r.random_range(0..8))
            .map(|_| Triple {
                subject: random_id(r),
                predicate: random_id(r),
                object: random_object(r),
                provenance: Provenance::Llm,
                source_ref: None,
            })
            .collect(),
    );
    if r.random_bool(0.5) {
        doc.context.insert("ex".into(), "http://example.org/".into());
    }
    doc
}

fn round_trips() -> Outcome {
    let mut r = rng(5);
    let docs = 200;
    for i in 0..docs {
        let doc = random_document(&mut r);
        let text = serialize_jsonld(&doc);
        let back = parse_jsonld(&text).map_err(|e| format!("document {i}: {e}\n{text}"))?;
        check(back == doc.canonical_order(), || format!("document {i} changed:\n{text}"))?;
        check(serialize_jsonld(&back) == text, || format!("document {i} serializes differently"))?;
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures().join("asp"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    files.push(fixtures().join("battery/rules.lp"));
    files.push(fixtures().join("healthcare/rules.lp"));
    files.sort();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
        let once = parse_program(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        let printed = once.to_string();
        let twice = parse_program(&printed).map_err(|e| format!("{}: reprint: {e}", f.display()))?;
        check(once == twice, || format!("{} does not reparse to itself", f.display()))?;
        check(twice.to_string() == printed, || format!("{} prints differently", f.display()))?;
    }
    Ok(format!("{docs} documents, {} programs", files.len()))
}

// 6. end-to-end fixtures through the binary

fn run_binary(name: &str) -> Result<(Option<i32>, Vec<u8>), String> {
    let dir = fixtures().join(name);
    let query = std::fs::read_to_string(dir.join("query.txt")).map_err(|e| e.to_string())?;
    let o = Command::new(env!("CARGO_BIN_EXE_tripleproof"))
        .arg("--config")
        .arg(dir.join("config.json"))
        .arg("run")
        .arg(query.trim())
        .output()
        .map_err(|e| e.to_string())?;
    Ok((o.status.code(), o.stdout))
}

fn end_to_end() -> Outcome {
    for (name, code, status, count) in [("battery", 0, "verified", 1), ("healthcare", 2, "refuted", 1)] {
        let (got_code, first) = run_binary(name)?;
        check(got_code == Some(code), || format!("{name}: exit {got_code:?}"))?;
        let report: serde_json::Value = serde_json::from_slice(&first).map_err(|e| format!("{name}: {e}"))?;
        let verdicts = report["verdicts"].as_array().cloned().unwrap_or_default();
        check(verdicts.len() == count, || format!("{name}: {} verdicts", verdicts.len()))?;
        check(verdicts.iter().all(|v| v["status"] == status), || format!("{name}: {verdicts:?}"))?;
        if name == "healthcare" {
            let cited = verdicts[0]["explanation"]["violated"][0]["constraint"].as_str().unwrap_or("");
            check(cited == ":- triple(P,has_diagnosis,D), not supported(P,D).", || {
                format!("healthcare cites {cited:?}")
            })?;
        }
        for _ in 0..2 {
            let (again_code, again) = run_binary(name)?;
            check(again_code == got_code && again == first, || format!("{name}: reports differ between runs"))?;
        }
    }
    Ok("battery 1 verified, healthcare 1 refuted, 3 identical runs each".into())
}

// 7. verification semantics

fn candidate_triples(ontology: &Ontology) -> (Vec<Triple>, MatchMap) {
    let mut matches = MatchMap::default();
    matches.insert(Slot::Relation, IS_A, Some(IS_A));
    for id in ontology.individuals() {
        matches.insert(Slot::Entity, id, Some(id));
    }
    for c in ontology.concepts() {
        matches.insert(Slot::Class, c, Some(c));
        matches.insert(Slot::Entity, c, Some(c));
    }
    for role in ontology.roles() {
        matches.insert(Slot::Relation, role, Some(role));
    }
    let mut triples = Vec::new();
    for s in ontology.individuals() {
        for c in ontology.concepts() {
            triples.push(Triple::new(s, IS_A, c).unwrap());
        }
        for role in ontology.roles() {
            for o in ontology.individuals().iter().chain(ontology.concepts()) {
                triples.push(Triple::new(s, role, o).unwrap());
            }
        }
    }
    (triples, matches)
}

fn query_atom(t: &Triple) -> GroundAtom {
    let o = t.object.as_id().unwrap();
    if t.predicate == IS_A {
        GroundAtom::from_ids("inst", &[&t.subject, o])
    } else {
        GroundAtom::from_ids("triple", &[&t.subject, &t.predicate, o])
    }
}

fn verification_semantics() -> Outcome {
    let mut checked = 0;
    for name in ["battery", "healthcare"] {
        let config = PipelineConfig::load(&fixtures().join(name).join("config.json")).map_err(|e| e.to_string())?;
        let loaded = Loaded::new(config).map_err(|e| e.to_string())?;
        let (triples, matches) = candidate_triples(&loaded.ontology);
        let verdicts = verify(&triples, &loaded.kb, &matches).map_err(|e| format!("{name}: {e}"))?;

        let program = loaded.kb.program();
        let all = stable_models(&program, 1 << 12);
        check(!all.truncated && !all.models.is_empty(), || format!("{name}: unexpected model set"))?;
        for (t, v) in triples.iter().zip(&verdicts) {
            let atom = query_atom(t);
            let cautious = all.models.iter().all(|m| m.contains(&atom));
            let mut asserted = program.clone();
            asserted.rules.push(Rule::fact(Atom::new(
                &atom.predicate,
                atom.args.iter().cloned().map(Term::Const).collect(),
            )));
            let refutable = stable_models(&asserted, 1).models.is_empty();
            check(!(cautious && refutable), || format!("{name}: {atom} both derivable and refutable"))?;
            let expected = if cautious {
                Status::Verified
            } else if refutable {
                Status::Refuted
            } else {
                Status::Unknown
            };
            check(v.status == expected, || format!("{name}: {atom} is {:?}, expected {expected:?}", v.status))?;
            checked += 1;
        }

        let unrelated = parse_program("unrelated_marker(zz_probe).").map_err(|e| e.to_string())?;
        let injected = loaded.kb.clone().with_rules(unrelated).map_err(|e| e.to_string())?;
        let after = verify(&triples, &injected, &matches).map_err(|e| format!("{name}: {e}"))?;
        let changed = verdicts.iter().zip(&after).filter(|(a, b)| a.status != b.status).count();
        check(changed == 0, || format!("{name}: {changed} verdicts changed after injection"))?;
    }
    Ok(format!("{checked} candidate triples, no overlap, no change on injection"))
}

// 8. retrieval

fn synthetic_corpus() -> Vec<Document> {
    (0..20)
        .map(|i| {
            let body = format!("common word{} uniq{i}{}", i % 4, " filler".repeat(i % 3));
            Document::new(&format!("doc{i:02}"), "", &body)
        })
        .collect()
}

fn retrieval() -> Outcome {
    let corpus = synthetic_corpus();
    let index = build_index(&corpus).map_err(|e| e.to_string())?;
    for i in 0..20 {
        let top = index.retrieve(&format!("uniq{i}"), 3);
        check(top.first().map(|x| x.0.as_str()) == Some(&format!("doc{i:02}")), || format!("uniq{i}: {top:?}"))?;
    }
    // N = 20, average length 79 / 20, k1 = 1.2, b = 0.75; values worked out by hand
    let spot = [
        ("uniq7", "doc07", 2.625461728031665),
        ("word1", "doc05", 1.2083693889221208),
        ("common", "doc00", 0.026727214195537457),
        ("filler", "doc02", 0.5652597154663013),
        ("uniq3 word3", "doc03", 4.413024538177566),
    ];
    for (query, doc, expected) in spot {
        let hits = index.retrieve(query, 20);
        let got = hits.iter().find(|(d, _)| d == doc).map(|x| x.1);
        check(got.is_some_and(|s| (s - expected).abs() < 1e-9), || {
            format!("{query} on {doc}: {got:?} != {expected}")
        })?;
    }
    Ok("20 unique-term queries at rank 1, 5 spot scores within 1e-9".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("asp oracle equivalence", asp_oracle),
        ("grounding soundness", grounding_soundness),
        ("el classification oracle", el_oracle),
        ("metric properties", metric_properties),
        ("round trips", round_trips),
        ("end-to-end fixtures", end_to_end),
        ("verification semantics", verification_semantics),
        ("retrieval", retrieval),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
