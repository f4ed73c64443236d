//! Formula-to-strategy pipeline: automaton, product, solve.

use thiserror::Error;

use crate::game::StochasticGame;
use crate::ltlf::{Dfa, Formula, LtlfError, DEFAULT_DFA_CAPACITY};
use crate::product::{build_product, emitted_labels, ProductError, ProductGame, DEFAULT_PRODUCT_CAPACITY};
use crate::scalar::Scalar;
use crate::solver::{synthesize, SolverError, SolverOptions, Synthesis};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ltlf(#[from] LtlfError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error("{0}")]
    Solver(String),
}

impl<T: Scalar> From<SolverError<T>> for PipelineError {
    fn from(e: SolverError<T>) -> Self {
        PipelineError::Solver(e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct Synthesized<T> {
    pub dfa: Dfa,
    pub product: ProductGame<T>,
    pub synthesis: Synthesis<T>,
}

impl<T: Scalar> Synthesized<T> {
    /// Value at the product's initial state.
    pub fn initial_value(&self) -> T {
        self.synthesis.values.values[self.product.initial()]
    }
}

/// Compiles `formula` over the labels the game actually emits. Propositions
/// unknown to the game are rejected.
pub fn compile_for<T: Scalar>(g: &StochasticGame<T>, formula: &Formula) -> Result<Dfa, LtlfError> {
    Dfa::with_alphabet(formula, &g.propositions, emitted_labels(g), DEFAULT_DFA_CAPACITY)
}

pub fn build_task_product<T: Scalar>(g: &StochasticGame<T>, formula: &Formula) -> Result<(Dfa, ProductGame<T>), PipelineError> {
    let dfa = compile_for(g, formula)?;
    let product = build_product(g, &dfa, true, DEFAULT_PRODUCT_CAPACITY)?;
    Ok((dfa, product))
}

/// Full synthesis for one game and formula.
pub fn synthesize_task<T: Scalar>(
    g: &StochasticGame<T>,
    formula: &Formula,
    opts: &SolverOptions,
) -> Result<Synthesized<T>, PipelineError> {
    let (dfa, product) = build_task_product(g, formula)?;
    let synthesis = synthesize(&product, opts)?;
    Ok(Synthesized { dfa, product, synthesis })
}
