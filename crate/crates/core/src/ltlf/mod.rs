//! Linear temporal logic over finite traces.
//!
//! Formulas are parsed from a small concrete syntax, evaluated directly on
//! finite traces, and compiled into deterministic finite automata whose
//! language is exactly the set of satisfying non-empty traces.

mod dfa;
mod parse;
mod semantics;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dfa::{Dfa, DEFAULT_DFA_CAPACITY};
pub use parse::parse;
pub use semantics::{eval_trace, is_nnf, satisfies, to_nnf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlfError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("invalid proposition name {0:?}")]
    InvalidProposition(String),
    #[error("traces must contain at least one step")]
    EmptyTrace,
    #[error("position {index} is out of range for a trace of length {len}")]
    Index { index: usize, len: usize },
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("automaton exceeds the configured capacity of {0} states")]
    Capacity(usize),
}

/// Atomic proposition name: a letter followed by letters, digits or `_`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Proposition(String);

impl Proposition {
    pub fn new(name: impl Into<String>) -> Result<Self, LtlfError> {
        let name = name.into();
        let mut chars = name.chars();
        let valid = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if valid {
            Ok(Proposition(name))
        } else {
            Err(LtlfError::InvalidProposition(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Proposition {
    type Error = LtlfError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Proposition::new(value)
    }
}

impl From<Proposition> for String {
    fn from(p: Proposition) -> Self {
        p.0
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of propositions holding at one step; one letter of the alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(BTreeSet<Proposition>);

impl Label {
    pub fn empty() -> Self {
        Label(BTreeSet::new())
    }

    /// Builds a label from proposition names.
    ///
    /// Panics on invalid names; intended for literals in tests and generators.
    pub fn of(names: &[&str]) -> Self {
        Label(
            names
                .iter()
                .map(|n| Proposition::new(*n).expect("valid proposition literal"))
                .collect(),
        )
    }

    pub fn contains(&self, p: &Proposition) -> bool {
        self.0.contains(p)
    }

    pub fn insert(&mut self, p: Proposition) {
        self.0.insert(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Proposition> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_subset(&self, universe: &BTreeSet<Proposition>) -> bool {
        self.0.is_subset(universe)
    }
}

impl FromIterator<Proposition> for Label {
    fn from_iter<I: IntoIterator<Item = Proposition>>(iter: I) -> Self {
        Label(iter.into_iter().collect())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Every subset of `universe`, in a fixed order (binary counting over the
/// sorted propositions).
pub fn all_labels(universe: &BTreeSet<Proposition>) -> Vec<Label> {
    let props: Vec<&Proposition> = universe.iter().collect();
    assert!(props.len() < 24, "alphabet of 2^{} labels is too large", props.len());
    (0u32..(1 << props.len()))
        .map(|mask| {
            props
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, p)| (*p).clone())
                .collect()
        })
        .collect()
}

/// Non-empty finite sequence of labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace(Vec<Label>);

impl Trace {
    pub fn new(steps: Vec<Label>) -> Result<Self, LtlfError> {
        if steps.is_empty() {
            Err(LtlfError::EmptyTrace)
        } else {
            Ok(Trace(steps))
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> &[Label] {
        &self.0
    }
}

/// LTLf abstract syntax.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Proposition),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Strong next: a next step must exist.
    Next(Box<Formula>),
    /// Weak next: holds vacuously at the last step.
    WeakNext(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(Proposition::new(name).expect("valid proposition literal"))
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Self {
        Formula::WeakNext(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Self {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    /// Conjunction of all formulas; `True` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Propositions mentioned anywhere in the formula.
    pub fn propositions(&self) -> BTreeSet<Proposition> {
        let mut out = BTreeSet::new();
        self.collect_propositions(&mut out);
        out
    }

    fn collect_propositions(&self, out: &mut BTreeSet<Proposition>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Eventually(f)
            | Formula::Globally(f) => f.collect_propositions(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.collect_propositions(out);
                b.collect_propositions(out);
            }
        }
    }
}

/// Prints in the concrete syntax accepted by [`parse`]; binary operators are
/// always parenthesised so printing then parsing gives back the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::Next(a) => write!(f, "X {a}"),
            Formula::WeakNext(a) => write!(f, "N {a}"),
            Formula::Eventually(a) => write!(f, "F {a}"),
            Formula::Globally(a) => write!(f, "G {a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
            Formula::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}
