use std::collections::BTreeSet;
use std::fmt;

/// A constant of the Herbrand universe.
///
/// The derived order puts integers first (by value), then symbols, then
/// quoted strings (by code point).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Int(i64),
    Symbol(String),
    Str(String),
}

impl Constant {
    /// A symbol when `id` is a valid lowercase identifier, a quoted string
    /// otherwise.
    pub fn from_id(id: &str) -> Constant {
        if is_symbol(id) {
            Constant::Symbol(id.to_string())
        } else {
            Constant::Str(id.to_string())
        }
    }

    /// The textual value: the symbol name, the unquoted string, or the number.
    pub fn value(&self) -> String {
        match self {
            Constant::Int(n) => n.to_string(),
            Constant::Symbol(s) | Constant::Str(s) => s.clone(),
        }
    }
}

pub(crate) fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "not"
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(n) => write!(f, "{n}"),
            Constant::Symbol(s) => f.write_str(s),
            Constant::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Constant),
    Var(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.to_string(),
            args,
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    /// The ground version of this atom, if it has no variables.
    pub fn to_ground(&self) -> Option<GroundAtom> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom {
            predicate: self.predicate.clone(),
            args,
        })
    }
}

fn write_atom<T: fmt::Display>(f: &mut fmt::Formatter<'_>, predicate: &str, args: &[T]) -> fmt::Result {
    f.write_str(predicate)?;
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, &self.predicate, &self.args)
    }
}

/// A normal rule, or an integrity constraint when `head` is `None`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Option<Atom>,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
}

impl Rule {
    pub fn fact(atom: Atom) -> Self {
        Rule {
            head: Some(atom),
            pos: Vec::new(),
            neg: Vec::new(),
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    /// The first variable of the head or negative body missing from the
    /// positive body.
    pub fn unsafe_variable(&self) -> Option<&str> {
        let bound: BTreeSet<&str> = self.pos.iter().flat_map(Atom::variables).collect();
        self.head
            .iter()
            .chain(&self.neg)
            .flat_map(Atom::variables)
            .find(|v| !bound.contains(v))
    }
}

fn write_rule<A: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    head: Option<&A>,
    pos: &[A],
    neg: &[A],
) -> fmt::Result {
    if let Some(h) = head {
        write!(f, "{h}")?;
    }
    if !pos.is_empty() || !neg.is_empty() {
        if head.is_some() {
            f.write_str(" ")?;
        }
        f.write_str(":- ")?;
        let literals = pos
            .iter()
            .map(|a| a.to_string())
            .chain(neg.iter().map(|a| format!("not {a}")));
        for (i, l) in literals.enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&l)?;
        }
    }
    f.write_str(".")
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(f, self.head.as_ref(), &self.pos, &self.neg)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn extend(&mut self, other: Program) {
        self.rules.extend(other.rules);
    }

    /// Predicates with their arity, in first-use order.
    pub fn signature(&self) -> Vec<(String, usize)> {
        let mut seen = Vec::new();
        for r in &self.rules {
            for a in r.head.iter().chain(&r.pos).chain(&r.neg) {
                let key = (a.predicate.clone(), a.args.len());
                if !seen.contains(&key) {
                    seen.push(key);
                }
            }
        }
        seen
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// A variable-free atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Constant>,
}

impl GroundAtom {
    pub fn new(predicate: &str, args: Vec<Constant>) -> Self {
        GroundAtom {
            predicate: predicate.to_string(),
            args,
        }
    }

    /// Shorthand for an atom whose arguments are ids (see [`Constant::from_id`]).
    pub fn from_ids(predicate: &str, ids: &[&str]) -> Self {
        GroundAtom::new(predicate, ids.iter().map(|id| Constant::from_id(id)).collect())
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, &self.predicate, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundRule {
    pub head: Option<GroundAtom>,
    pub pos: Vec<GroundAtom>,
    pub neg: Vec<GroundAtom>,
    /// Index of the source rule this instance was produced from.
    pub origin: Option<usize>,
}

impl GroundRule {
    pub fn fact(atom: GroundAtom) -> Self {
        GroundRule {
            head: Some(atom),
            pos: Vec::new(),
            neg: Vec::new(),
            origin: None,
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(f, self.head.as_ref(), &self.pos, &self.neg)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub rules: Vec<GroundRule>,
}

impl GroundProgram {
    pub fn new(rules: Vec<GroundRule>) -> Self {
        GroundProgram { rules }
    }

    /// Every atom occurring in the program.
    pub fn atoms(&self) -> BTreeSet<GroundAtom> {
        self.rules
            .iter()
            .flat_map(|r| r.head.iter().chain(&r.pos).chain(&r.neg))
            .cloned()
            .collect()
    }

    /// The ground program of an already variable-free program.
    pub fn from_program(program: &Program) -> Option<Self> {
        program
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Some(GroundRule {
                    head: match &r.head {
                        Some(h) => Some(h.to_ground()?),
                        None => None,
                    },
                    pos: r.pos.iter().map(Atom::to_ground).collect::<Option<_>>()?,
                    neg: r.neg.iter().map(Atom::to_ground).collect::<Option<_>>()?,
                    origin: Some(i),
                })
            })
            .collect::<Option<Vec<_>>>()
            .map(GroundProgram::new)
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
