//! Reachability solving on product games: qualitative precomputation, value
//! iteration and strategy extraction.

mod iteration;
mod qualitative;
mod strategy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Player;
use crate::product::ProductGame;
use crate::scalar::Scalar;

pub use iteration::{value_iteration, ValueVector};
pub use qualitative::{find_mecs, prob0, prob1, EndComponent};
pub use strategy::{extract_strategy, opponent_values, verify_strategy, Strategy};

/// Whether the robot maximizes or minimizes the probability of reaching the target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Maximize,
    Minimize,
}

impl Objective {
    /// True when `player` pushes values up under this objective.
    pub fn maximizes(self, player: Player) -> bool {
        (player == Player::Robot) == (self == Objective::Maximize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
    /// In-place sequential sweeps instead of synchronous ones.
    pub gauss_seidel: bool,
    /// Worker threads for synchronous sweeps: 1 runs inline, 0 uses the global pool.
    pub threads: usize,
    pub objective: Objective,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            epsilon: 1e-6,
            max_iterations: 100_000,
            gauss_seidel: false,
            threads: 1,
            objective: Objective::Maximize,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError<T: Scalar> {
    #[error("invalid solver options: {0}")]
    Options(String),
    #[error("value iteration did not converge in {} iterations (residual {residual})", .values.iterations)]
    NonConvergence { values: ValueVector<T>, residual: f64 },
}

/// Everything the solver computes for one product.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis<T> {
    pub values: ValueVector<T>,
    pub strategy: Strategy,
    pub prob0: Vec<bool>,
    pub prob1: Vec<bool>,
    pub mecs: Vec<EndComponent>,
}

/// Runs precomputation, value iteration and strategy extraction.
pub fn synthesize<T: Scalar>(pg: &ProductGame<T>, opts: &SolverOptions) -> Result<Synthesis<T>, SolverError<T>> {
    let values = value_iteration(pg, opts)?;
    let strategy = extract_strategy(pg, &values, opts.objective);
    Ok(Synthesis {
        prob0: prob0(pg, opts.objective),
        prob1: prob1(pg, opts.objective),
        mecs: find_mecs(pg),
        values,
        strategy,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::model::{Choice, GameGraph, Player};
    use crate::product::ProductGame;

    /// s0 robot: a → 0.9 target, 0.1 s1. s1 human: back → s0, quit → sink.
    /// States: 0 = s0, 1 = s1, 2 = target, 3 = sink.
    pub fn tiny() -> ProductGame<f64> {
        let graph = GameGraph {
            player: vec![Player::Robot, Player::Human, Player::Robot, Player::Robot],
            choices: vec![
                vec![Choice::new("a", vec![(2, 0.9), (1, 0.1)])],
                vec![Choice::new("back", vec![(0, 1.0)]), Choice::new("quit", vec![(3, 1.0)])],
                vec![Choice::self_loop("stay", 2)],
                vec![Choice::self_loop("stay", 3)],
            ],
            initial: 0,
        };
        ProductGame::from_graph(graph, vec![false, false, true, false])
    }

    /// One robot state retrying: 0.9 to the target, 0.1 back to itself.
    pub fn retry(fail_to_sink: bool) -> ProductGame<f64> {
        let fail = if fail_to_sink { 2 } else { 0 };
        let graph = GameGraph {
            player: vec![Player::Robot; 3],
            choices: vec![
                vec![Choice::new("try", vec![(1, 0.9), (fail, 0.1)])],
                vec![Choice::self_loop("stay", 1)],
                vec![Choice::self_loop("stay", 2)],
            ],
            initial: 0,
        };
        ProductGame::from_graph(graph, vec![false, true, false])
    }
}
