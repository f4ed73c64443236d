//! Synchronous product of a game with a task automaton.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::game::{StochasticGame, STAY};
use crate::ltlf::{Dfa, Label, LtlfError, Proposition};
use crate::model::{Choice, GameGraph, Player};
use crate::scalar::Scalar;

pub const DEFAULT_PRODUCT_CAPACITY: usize = 20_000_000;

#[derive(Debug, Error)]
pub enum ProductError {
    #[error("game label {label} at state {state} is not in the automaton alphabet")]
    Alphabet { state: usize, label: Label },
    #[error("product exceeds the configured capacity of {0} states")]
    Capacity(usize),
    #[error(transparent)]
    Ltlf(#[from] LtlfError),
}

/// Game × automaton. State `i` pairs game state `pairs[i].0` with automaton state `pairs[i].1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGame<T> {
    pub graph: GameGraph<T>,
    pub pairs: Vec<(usize, usize)>,
    pub target: Vec<bool>,
    pub labels: Vec<Label>,
    pub propositions: BTreeSet<Proposition>,
    pub variables: Vec<String>,
    pub valuations: Vec<Vec<i64>>,
}

impl<T: Scalar> ProductGame<T> {
    /// Wraps a bare graph with a target mask, without any automaton.
    pub fn from_graph(graph: GameGraph<T>, target: Vec<bool>) -> Self {
        let n = graph.num_states();
        assert_eq!(target.len(), n, "target mask length");
        ProductGame {
            graph,
            pairs: (0..n).map(|s| (s, 0)).collect(),
            target,
            labels: vec![Label::empty(); n],
            propositions: BTreeSet::new(),
            variables: vec!["s".into()],
            valuations: (0..n as i64).map(|s| vec![s]).collect(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.graph.num_states()
    }

    pub fn num_transitions(&self) -> usize {
        self.graph.num_transitions()
    }

    pub fn initial(&self) -> usize {
        self.graph.initial
    }

    pub fn player(&self, s: usize) -> Player {
        self.graph.player[s]
    }

    pub fn choices(&self, s: usize) -> &[Choice<T>] {
        &self.graph.choices[s]
    }

    pub fn target_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.target.iter().enumerate().filter(|(_, &t)| t).map(|(s, _)| s)
    }
}

/// Distinct labels emitted by `g`, in order of first occurrence.
pub fn emitted_labels<T: Scalar>(g: &StochasticGame<T>) -> Vec<Label> {
    let mut seen = BTreeSet::new();
    g.labels.iter().filter(|l| seen.insert(*l)).cloned().collect()
}

/// Builds the reachable product. The automaton first reads the label of the
/// initial game state. With `absorb_targets`, accepting product states keep a
/// single `stay` self-loop.
pub fn build_product<T: Scalar>(
    g: &StochasticGame<T>,
    d: &Dfa,
    absorb_targets: bool,
    capacity: usize,
) -> Result<ProductGame<T>, ProductError> {
    let mut letters = Vec::with_capacity(g.num_states());
    for (state, label) in g.labels.iter().enumerate() {
        match d.letter(label) {
            Some(l) => letters.push(l),
            None => {
                return Err(ProductError::Alphabet {
                    state,
                    label: label.clone(),
                })
            }
        }
    }
    let g0 = g.initial();
    let start = (g0, d.step_letter(d.initial(), letters[g0]));
    let mut pairs = vec![start];
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([(start, 0)]);
    let mut choices: Vec<Vec<Choice<T>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(pi) = queue.pop_front() {
        let (s, q) = pairs[pi];
        let here = if absorb_targets && d.is_accepting(q) {
            vec![Choice::self_loop(STAY, pi)]
        } else {
            let mut here = Vec::with_capacity(g.graph.choices[s].len());
            for c in &g.graph.choices[s] {
                let mut transitions = Vec::with_capacity(c.transitions.len());
                for &(t, p) in &c.transitions {
                    let key = (t, d.step_letter(q, letters[t]));
                    let ti = match index.get(&key) {
                        Some(&ti) => ti,
                        None => {
                            if pairs.len() >= capacity {
                                return Err(ProductError::Capacity(capacity));
                            }
                            let ti = pairs.len();
                            index.insert(key, ti);
                            pairs.push(key);
                            queue.push_back(ti);
                            ti
                        }
                    };
                    transitions.push((ti, p));
                }
                here.push(Choice::new(c.action.clone(), transitions));
            }
            here
        };
        if choices.len() <= pi {
            choices.resize_with(pi + 1, Vec::new);
        }
        choices[pi] = here;
    }
    let mut variables = g.variables.clone();
    variables.push("dfa".into());
    Ok(ProductGame {
        graph: GameGraph {
            player: pairs.iter().map(|&(s, _)| g.graph.player[s]).collect(),
            choices,
            initial: 0,
        },
        target: pairs.iter().map(|&(_, q)| d.is_accepting(q)).collect(),
        labels: pairs.iter().map(|&(s, _)| g.labels[s].clone()).collect(),
        propositions: g.propositions.clone(),
        variables,
        valuations: pairs
            .iter()
            .map(|&(s, q)| {
                let mut v = g.valuations[s].clone();
                v.push(q as i64);
                v
            })
            .collect(),
        pairs,
    })
}
