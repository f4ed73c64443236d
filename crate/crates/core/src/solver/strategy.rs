//! Memoryless strategy extraction and independent verification.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{prob0, Objective, ValueVector};
use crate::model::{GameGraph, Player};
use crate::product::ProductGame;
use crate::scalar::Scalar;

/// Memoryless deterministic choices for both players, as choice indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub robot_choice: Vec<Option<usize>>,
    pub human_choice: Vec<Option<usize>>,
}

impl Strategy {
    pub fn choice(&self, s: usize, player: Player) -> Option<usize> {
        match player {
            Player::Robot => self.robot_choice[s],
            Player::Human => self.human_choice[s],
        }
    }
}

/// Attractor layers to the target in which maximizer states may only use the
/// given candidate choices and minimizer states must be forced along every choice.
fn ranks<T: Scalar>(pg: &ProductGame<T>, maximizer: &[bool], candidates: &[Vec<usize>]) -> Vec<usize> {
    let n = pg.num_states();
    let preds = pg.graph.predecessors();
    let mut rank = vec![usize::MAX; n];
    let mut pending: Vec<usize> = (0..n).map(|s| pg.choices(s).len()).collect();
    let mut hit: Vec<Vec<bool>> = (0..n).map(|s| vec![false; pg.choices(s).len()]).collect();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in pg.target_states() {
        rank[s] = 0;
        queue.push_back(s);
    }
    while let Some(t) = queue.pop_front() {
        for &(s, c) in &preds[t] {
            if rank[s] != usize::MAX || hit[s][c] {
                continue;
            }
            hit[s][c] = true;
            let joins = if maximizer[s] {
                candidates[s].contains(&c)
            } else {
                pending[s] -= 1;
                pending[s] == 0
            };
            if joins {
                rank[s] = rank[t] + 1;
                queue.push_back(s);
            }
        }
    }
    rank
}

/// Chooses value-optimal actions. Maximizer states pick, among actions within
/// `epsilon` of the best, the lowest-indexed one that moves closer to the
/// target inside the optimal subgame; minimizer states take the lowest-indexed
/// near-minimal action.
pub fn extract_strategy<T: Scalar>(pg: &ProductGame<T>, v: &ValueVector<T>, objective: Objective) -> Strategy {
    let n = pg.num_states();
    let tol = T::lit(v.epsilon);
    let maximizer: Vec<bool> = (0..n).map(|s| objective.maximizes(pg.player(s))).collect();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let expected: Vec<T> = pg.choices(s).iter().map(|c| c.expected(&v.values)).collect();
            if expected.is_empty() {
                return Vec::new();
            }
            if maximizer[s] {
                let best = expected.iter().copied().fold(T::neg_infinity(), T::max);
                (0..expected.len()).filter(|&c| expected[c] >= best - tol).collect()
            } else {
                let best = expected.iter().copied().fold(T::infinity(), T::min);
                (0..expected.len()).filter(|&c| expected[c] <= best + tol).collect()
            }
        })
        .collect();
    let rank = ranks(pg, &maximizer, &candidates);
    let mut strategy = Strategy {
        robot_choice: vec![None; n],
        human_choice: vec![None; n],
    };
    for s in 0..n {
        let Some(&first) = candidates[s].first() else { continue };
        let pick = if maximizer[s] && rank[s] != usize::MAX && rank[s] > 0 {
            candidates[s]
                .iter()
                .copied()
                .find(|&c| pg.choices(s)[c].support().any(|t| rank[t] < rank[s]))
                .unwrap_or(first)
        } else {
            first
        };
        match pg.player(s) {
            Player::Robot => strategy.robot_choice[s] = Some(pick),
            Player::Human => strategy.human_choice[s] = Some(pick),
        }
    }
    strategy
}

/// Values of the one-player game left after fixing the robot's choices, with
/// the human optimizing against the objective. Solved from zero by plain
/// synchronous iteration after removing states that cannot reach the target.
pub fn opponent_values<T: Scalar>(pg: &ProductGame<T>, strat: &Strategy, objective: Objective, eps: f64) -> Vec<T> {
    let n = pg.num_states();
    let mut restricted = pg.clone();
    restricted.graph = GameGraph {
        player: pg.graph.player.clone(),
        choices: (0..n)
            .map(|s| match (pg.player(s), strat.robot_choice[s]) {
                (Player::Robot, Some(c)) => vec![pg.choices(s)[c].clone()],
                _ => pg.choices(s).to_vec(),
            })
            .collect(),
        initial: pg.initial(),
    };
    let dead = prob0(&restricted, objective);
    let human_max = objective == Objective::Minimize;
    let mut v: Vec<T> = (0..n).map(|s| if pg.target[s] { T::one() } else { T::zero() }).collect();
    let tol = T::lit(eps);
    for _ in 0..10_000_000usize {
        let mut delta = T::zero();
        let next: Vec<T> = (0..n)
            .map(|s| {
                if pg.target[s] || dead[s] {
                    return v[s];
                }
                let values = restricted.graph.choices[s].iter().map(|c| c.expected(&v));
                let x = match pg.player(s) {
                    Player::Human if human_max => values.fold(T::zero(), T::max),
                    Player::Human => values.fold(T::one(), T::min),
                    Player::Robot => values.fold(T::zero(), T::max),
                };
                delta = delta.max((x - v[s]).abs());
                x
            })
            .collect();
        v = next;
        if delta < tol {
            break;
        }
    }
    v
}

/// Fixes the robot's choices, solves the remaining one-player problem
/// independently and checks every state's value against `v` within `10·eps`.
pub fn verify_strategy<T: Scalar>(
    pg: &ProductGame<T>,
    strat: &Strategy,
    v: &ValueVector<T>,
    eps: f64,
    objective: Objective,
) -> bool {
    let n = pg.num_states();
    if strat.robot_choice.len() != n {
        return false;
    }
    for s in 0..n {
        if pg.player(s) == Player::Robot && !pg.choices(s).is_empty() {
            match strat.robot_choice[s] {
                Some(c) if c < pg.choices(s).len() => {}
                _ => return false,
            }
        }
    }
    // The independent solve stops on a much finer residual: on slowly mixing
    // chains the distance to the fixed point is far larger than the last change.
    let fixed = opponent_values(pg, strat, objective, eps * 1e-3);
    let tol = 10.0 * eps;
    (0..n).all(|s| (fixed[s].as_f64() - v.values[s].as_f64()).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::tiny;
    use super::super::{value_iteration, SolverOptions};
    use super::*;
    use crate::model::Choice;

    #[test]
    fn tiny_game_strategy() {
        let pg = tiny();
        let v = value_iteration(&pg, &SolverOptions::default()).unwrap();
        let s = extract_strategy(&pg, &v, Objective::Maximize);
        assert_eq!(s.robot_choice[0], Some(0));
        assert_eq!(s.human_choice[1], Some(1), "human quits");
        assert!(verify_strategy(&pg, &s, &v, 1e-6, Objective::Maximize));
        let fixed = opponent_values(&pg, &s, Objective::Maximize, 1e-9);
        assert!((fixed[0] - 0.9).abs() < 1e-9);
    }

    #[test]
    fn equal_actions_take_lowest_index() {
        let graph = GameGraph {
            player: vec![Player::Robot, Player::Robot, Player::Robot],
            choices: vec![
                vec![Choice::new("a", vec![(1, 0.9), (2, 0.1)]), Choice::new("b", vec![(1, 0.9), (2, 0.1)])],
                vec![Choice::self_loop("stay", 1)],
                vec![Choice::self_loop("stay", 2)],
            ],
            initial: 0,
        };
        let pg = ProductGame::from_graph(graph, vec![false, true, false]);
        let v = value_iteration(&pg, &SolverOptions::default()).unwrap();
        assert_eq!(extract_strategy(&pg, &v, Objective::Maximize).robot_choice[0], Some(0));
    }

    /// Idling keeps the value but never finishes; the strategy must make progress.
    #[test]
    fn value_preserving_idle_is_avoided() {
        let graph = GameGraph {
            player: vec![Player::Robot, Player::Robot],
            choices: vec![
                vec![Choice::self_loop("idle", 0), Choice::new("go", vec![(1, 1.0)])],
                vec![Choice::self_loop("stay", 1)],
            ],
            initial: 0,
        };
        let pg = ProductGame::from_graph(graph, vec![false, true]);
        let v = value_iteration(&pg, &SolverOptions::default()).unwrap();
        let s = extract_strategy(&pg, &v, Objective::Maximize);
        assert_eq!(s.robot_choice[0], Some(1));
        assert!(verify_strategy(&pg, &s, &v, 1e-6, Objective::Maximize));
    }

    #[test]
    fn corrupted_strategy_fails_verification() {
        let pg = tiny();
        let v = value_iteration(&pg, &SolverOptions::default()).unwrap();
        let mut s = extract_strategy(&pg, &v, Objective::Maximize);
        let mut graph = pg.graph.clone();
        graph.choices[0].push(Choice::self_loop("idle", 0));
        let pg = ProductGame::from_graph(graph, pg.target.clone());
        s.robot_choice[0] = Some(1);
        assert!(!verify_strategy(&pg, &s, &v, 1e-6, Objective::Maximize));
    }

    #[test]
    fn all_target_verifies() {
        let graph = GameGraph {
            player: vec![Player::Robot],
            choices: vec![vec![Choice::<f64>::self_loop("stay", 0)]],
            initial: 0,
        };
        let pg = ProductGame::from_graph(graph, vec![true]);
        let v = value_iteration(&pg, &SolverOptions::default()).unwrap();
        let s = extract_strategy(&pg, &v, Objective::Maximize);
        assert!(verify_strategy(&pg, &s, &v, 1e-6, Objective::Maximize));
    }
}
