//! Compilation of formulas into deterministic finite automata.
//!
//! The construction progresses residual obligations through the input. A
//! residual is kept in a canonical disjunctive normal form over temporal
//! leaves (atoms, next, weak next, until, release of the normalised formula),
//! so the set of reachable residuals is finite. Each automaton state pairs a
//! residual with a flag recording whether the trace read so far, if it ended
//! here, satisfies the formula. The result is minimised.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{to_nnf, Formula, Label, LtlfError, Proposition, Trace};

pub const DEFAULT_DFA_CAPACITY: usize = 1_000_000;

/// Deterministic automaton over an explicit alphabet of labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<Label>,
    letter_index: HashMap<Label, usize>,
    /// `delta[state][letter]`
    delta: Vec<Vec<usize>>,
    initial: usize,
    accepting: Vec<bool>,
}

impl Dfa {
    /// Compiles `f` over the full alphabet `2^universe`.
    pub fn from_formula(f: &Formula, universe: &BTreeSet<Proposition>) -> Result<Dfa, LtlfError> {
        let alphabet = super::all_labels(universe);
        Dfa::with_alphabet(f, universe, alphabet, DEFAULT_DFA_CAPACITY)
    }

    /// Compiles `f` over a caller-chosen set of labels drawn from `universe`.
    pub fn with_alphabet(
        f: &Formula,
        universe: &BTreeSet<Proposition>,
        alphabet: Vec<Label>,
        capacity: usize,
    ) -> Result<Dfa, LtlfError> {
        if let Some(p) = f.propositions().iter().find(|p| !universe.contains(*p)) {
            return Err(LtlfError::Alphabet(format!(
                "formula mentions proposition '{p}' outside the declared universe"
            )));
        }
        let mut letters: Vec<Label> = Vec::with_capacity(alphabet.len());
        let mut letter_index = HashMap::with_capacity(alphabet.len());
        for label in alphabet {
            if !label.is_subset(universe) {
                return Err(LtlfError::Alphabet(format!(
                    "label {label} is not a subset of the declared universe"
                )));
            }
            if !letter_index.contains_key(&label) {
                letter_index.insert(label.clone(), letters.len());
                letters.push(label);
            }
        }
        if letters.is_empty() {
            return Err(LtlfError::Alphabet("empty alphabet".into()));
        }

        let mut builder = Builder::new(&to_nnf(f));
        let classes = builder.letter_classes(&letters);
        let unflagged = builder.explore(&classes, false, capacity)?;
        let flagged = builder.explore(&classes, true, capacity)?;
        let a = minimize(unflagged);
        let b = minimize(flagged);
        // The acceptance of the initial state is irrelevant for non-empty
        // traces, so keep whichever choice gives the smaller automaton.
        let raw = if b.accepting.len() < a.accepting.len() { b } else { a };

        Ok(Dfa {
            alphabet: letters,
            letter_index,
            delta: raw.delta,
            initial: 0,
            accepting: raw.accepting,
        })
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    pub fn letter(&self, label: &Label) -> Option<usize> {
        self.letter_index.get(label).copied()
    }

    pub fn step_letter(&self, state: usize, letter: usize) -> usize {
        self.delta[state][letter]
    }

    pub fn step(&self, state: usize, label: &Label) -> Result<usize, LtlfError> {
        let letter = self
            .letter(label)
            .ok_or_else(|| LtlfError::Alphabet(format!("label {label} is not in the automaton alphabet")))?;
        Ok(self.delta[state][letter])
    }

    /// Runs the automaton over a non-empty trace.
    pub fn accepts(&self, trace: &Trace) -> Result<bool, LtlfError> {
        let mut state = self.initial;
        for label in trace.steps() {
            state = self.step(state, label)?;
        }
        Ok(self.accepting[state])
    }

    /// States reachable from `state` in one step, one entry per letter.
    pub fn successors(&self, state: usize) -> &[usize] {
        &self.delta[state]
    }
}

type NodeId = u32;
type Clause = BTreeSet<NodeId>;
/// Disjunction of conjunctive clauses; `{}` is false and `{{}}` is true.
type Dnf = BTreeSet<Clause>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Atom(u32, bool),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Next(NodeId),
    WeakNext(NodeId),
    Until(NodeId, NodeId),
    Release(NodeId, NodeId),
}

fn dnf_true() -> Dnf {
    std::iter::once(Clause::new()).collect()
}

fn dnf_or(a: &Dnf, b: &Dnf) -> Dnf {
    absorb(a.union(b).cloned().collect())
}

fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Dnf::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).copied().collect());
        }
    }
    absorb(out)
}

/// Drops clauses that are strict supersets of another clause.
fn absorb(dnf: Dnf) -> Dnf {
    let clauses: Vec<Clause> = dnf.into_iter().collect();
    clauses
        .iter()
        .filter(|c| !clauses.iter().any(|d| d.len() < c.len() && d.is_subset(c)))
        .cloned()
        .collect()
}

struct Builder {
    nodes: Vec<Node>,
    interned: HashMap<Node, NodeId>,
    atoms: Vec<Proposition>,
    root: NodeId,
    /// memo for progression, keyed by (leaf, letter class)
    progress_memo: HashMap<(NodeId, usize), Dnf>,
}

struct RawDfa {
    delta: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

impl Builder {
    fn new(nnf: &Formula) -> Self {
        let mut b = Builder {
            nodes: Vec::new(),
            interned: HashMap::new(),
            atoms: Vec::new(),
            root: 0,
            progress_memo: HashMap::new(),
        };
        b.root = b.intern(nnf);
        b
    }

    fn add(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node.clone());
        self.interned.insert(node, id);
        id
    }

    fn atom_id(&mut self, p: &Proposition) -> u32 {
        match self.atoms.iter().position(|q| q == p) {
            Some(i) => i as u32,
            None => {
                self.atoms.push(p.clone());
                (self.atoms.len() - 1) as u32
            }
        }
    }

    fn intern(&mut self, f: &Formula) -> NodeId {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Atom(p) => Node::Atom(self.atom_id(p), true),
            Formula::Not(inner) => match &**inner {
                Formula::Atom(p) => Node::Atom(self.atom_id(p), false),
                other => unreachable!("negation above non-atom after normalisation: {other}"),
            },
            Formula::And(a, b) => Node::And(self.intern(a), self.intern(b)),
            Formula::Or(a, b) => Node::Or(self.intern(a), self.intern(b)),
            Formula::Next(a) => Node::Next(self.intern(a)),
            Formula::WeakNext(a) => Node::WeakNext(self.intern(a)),
            Formula::Until(a, b) => Node::Until(self.intern(a), self.intern(b)),
            Formula::Release(a, b) => Node::Release(self.intern(a), self.intern(b)),
            Formula::Implies(..) | Formula::Eventually(_) | Formula::Globally(_) => {
                unreachable!("derived operator after normalisation")
            }
        };
        self.add(node)
    }

    /// Groups letters by the truth values they assign to the formula's atoms.
    /// Returns, per letter, the class index, plus the valuation of each class.
    fn letter_classes(&self, letters: &[Label]) -> (Vec<usize>, Vec<Vec<bool>>) {
        let mut class_of = Vec::with_capacity(letters.len());
        let mut valuations: Vec<Vec<bool>> = Vec::new();
        let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
        for label in letters {
            let val: Vec<bool> = self.atoms.iter().map(|p| label.contains(p)).collect();
            let next = valuations.len();
            let class = *seen.entry(val.clone()).or_insert_with(|| {
                valuations.push(val);
                next
            });
            class_of.push(class);
        }
        (class_of, valuations)
    }

    fn to_dnf(&self, id: NodeId) -> Dnf {
        match self.nodes[id as usize] {
            Node::True => dnf_true(),
            Node::False => Dnf::new(),
            Node::And(a, b) => dnf_and(&self.to_dnf(a), &self.to_dnf(b)),
            Node::Or(a, b) => dnf_or(&self.to_dnf(a), &self.to_dnf(b)),
            _ => std::iter::once(std::iter::once(id).collect()).collect(),
        }
    }

    /// Obligation on the next position for a trace that continues past the
    /// current one.
    fn progress(&mut self, id: NodeId, class: usize, val: &[bool]) -> Dnf {
        if let Some(d) = self.progress_memo.get(&(id, class)) {
            return d.clone();
        }
        let out = match self.nodes[id as usize].clone() {
            Node::True => dnf_true(),
            Node::False => Dnf::new(),
            Node::Atom(p, positive) => {
                if val[p as usize] == positive {
                    dnf_true()
                } else {
                    Dnf::new()
                }
            }
            Node::And(a, b) => {
                let da = self.progress(a, class, val);
                let db = self.progress(b, class, val);
                dnf_and(&da, &db)
            }
            Node::Or(a, b) => {
                let da = self.progress(a, class, val);
                let db = self.progress(b, class, val);
                dnf_or(&da, &db)
            }
            Node::Next(a) | Node::WeakNext(a) => self.to_dnf(a),
            Node::Until(a, b) => {
                // a U b  ==  b | (a & X(a U b))
                let db = self.progress(b, class, val);
                let da = self.progress(a, class, val);
                let again: Dnf = std::iter::once(std::iter::once(id).collect()).collect();
                dnf_or(&db, &dnf_and(&da, &again))
            }
            Node::Release(a, b) => {
                // a R b  ==  b & (a | N(a R b))
                let db = self.progress(b, class, val);
                let da = self.progress(a, class, val);
                let again: Dnf = std::iter::once(std::iter::once(id).collect()).collect();
                dnf_and(&db, &dnf_or(&da, &again))
            }
        };
        self.progress_memo.insert((id, class), out.clone());
        out
    }

    /// Whether the node holds at the final position of a trace.
    fn holds_at_end(&self, id: NodeId, val: &[bool]) -> bool {
        match self.nodes[id as usize] {
            Node::True => true,
            Node::False => false,
            Node::Atom(p, positive) => val[p as usize] == positive,
            Node::And(a, b) => self.holds_at_end(a, val) && self.holds_at_end(b, val),
            Node::Or(a, b) => self.holds_at_end(a, val) || self.holds_at_end(b, val),
            Node::Next(_) => false,
            Node::WeakNext(_) => true,
            Node::Until(_, b) | Node::Release(_, b) => self.holds_at_end(b, val),
        }
    }

    fn step(&mut self, residual: &Dnf, class: usize, val: &[bool]) -> (Dnf, bool) {
        let mut next = Dnf::new();
        let mut ends_ok = false;
        for clause in residual {
            let mut conj = dnf_true();
            for &leaf in clause {
                if conj.is_empty() {
                    break;
                }
                let p = self.progress(leaf, class, val);
                conj = dnf_and(&conj, &p);
            }
            next = dnf_or(&next, &conj);
            if clause.iter().all(|&leaf| self.holds_at_end(leaf, val)) {
                ends_ok = true;
            }
        }
        (next, ends_ok)
    }

    fn explore(
        &mut self,
        classes: &(Vec<usize>, Vec<Vec<bool>>),
        initial_flag: bool,
        capacity: usize,
    ) -> Result<RawDfa, LtlfError> {
        let (class_of, valuations) = classes;
        let start = (self.to_dnf(self.root), initial_flag);
        let mut index: HashMap<(Dnf, bool), usize> = HashMap::new();
        let mut states = vec![start.clone()];
        index.insert(start, 0);
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            let residual = states[s].0.clone();
            let mut by_class = Vec::with_capacity(valuations.len());
            for (class, val) in valuations.iter().enumerate() {
                let key = self.step(&residual, class, val);
                let target = match index.get(&key) {
                    Some(&t) => t,
                    None => {
                        let t = states.len();
                        if t >= capacity {
                            return Err(LtlfError::Capacity(capacity));
                        }
                        states.push(key.clone());
                        index.insert(key, t);
                        queue.push_back(t);
                        t
                    }
                };
                by_class.push(target);
            }
            if delta.len() <= s {
                delta.resize(s + 1, Vec::new());
            }
            delta[s] = class_of.iter().map(|&c| by_class[c]).collect();
        }
        Ok(RawDfa {
            delta,
            accepting: states.iter().map(|(_, flag)| *flag).collect(),
        })
    }
}

/// Moore partition refinement, renumbering blocks in breadth-first order
/// from state 0 so the output is canonical.
fn minimize(raw: RawDfa) -> RawDfa {
    let n = raw.accepting.len();
    let mut block: Vec<usize> = raw.accepting.iter().map(|&a| usize::from(a)).collect();
    let mut num_blocks = block.iter().copied().collect::<BTreeSet<_>>().len();
    loop {
        let mut signatures: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let sig = (block[s], raw.delta[s].iter().map(|&t| block[t]).collect::<Vec<_>>());
            let fresh = signatures.len();
            next[s] = *signatures.entry(sig).or_insert(fresh);
        }
        let count = signatures.len();
        block = next;
        if count == num_blocks {
            break;
        }
        num_blocks = count;
    }

    let mut order: Vec<Option<usize>> = vec![None; num_blocks];
    let mut representatives = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    order[block[0]] = Some(0);
    representatives.push(0);
    while let Some(s) = queue.pop_front() {
        for &t in &raw.delta[s] {
            if order[block[t]].is_none() {
                order[block[t]] = Some(representatives.len());
                representatives.push(t);
                queue.push_back(t);
            }
        }
    }
    let delta = representatives
        .iter()
        .map(|&s| raw.delta[s].iter().map(|&t| order[block[t]].unwrap()).collect())
        .collect();
    let accepting = representatives.iter().map(|&s| raw.accepting[s]).collect();
    RawDfa { delta, accepting }
}
