//! Graph-based precomputation: states with value 0 or 1 and maximal end components.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::Objective;
use crate::product::ProductGame;
use crate::scalar::Scalar;

/// Least fixed point from the target: maximizer states join when some choice
/// can enter the set, minimizer states when every choice can.
fn positive_reach<T: Scalar>(pg: &ProductGame<T>, objective: Objective, within: &[bool]) -> Vec<bool> {
    let n = pg.num_states();
    let preds = pg.graph.predecessors();
    let mut inside: Vec<bool> = (0..n).map(|s| pg.target[s] && within[s]).collect();
    // For minimizer states, the number of choices not yet known to hit the set.
    let mut pending: Vec<usize> = (0..n).map(|s| pg.choices(s).len()).collect();
    let mut hit = vec![Vec::<bool>::new(); n];
    for s in 0..n {
        hit[s] = vec![false; pg.choices(s).len()];
    }
    let mut stack: Vec<usize> = (0..n).filter(|&s| inside[s]).collect();
    while let Some(t) = stack.pop() {
        for &(s, c) in &preds[t] {
            if inside[s] || !within[s] || hit[s][c] {
                continue;
            }
            hit[s][c] = true;
            pending[s] -= 1;
            let joins = if objective.maximizes(pg.player(s)) {
                true
            } else {
                pending[s] == 0
            };
            if joins {
                inside[s] = true;
                stack.push(s);
            }
        }
    }
    inside
}

/// States from which the target cannot be reached with positive probability.
pub fn prob0<T: Scalar>(pg: &ProductGame<T>, objective: Objective) -> Vec<bool> {
    let all = vec![true; pg.num_states()];
    positive_reach(pg, objective, &all).into_iter().map(|x| !x).collect()
}

/// States from which the maximizer reaches the target almost surely.
pub fn prob1<T: Scalar>(pg: &ProductGame<T>, objective: Objective) -> Vec<bool> {
    let n = pg.num_states();
    let mut y = vec![true; n];
    loop {
        let mut x: Vec<bool> = (0..n).map(|s| pg.target[s] && y[s]).collect();
        loop {
            let mut changed = false;
            for s in 0..n {
                if x[s] || !y[s] {
                    continue;
                }
                let good = |c: &crate::model::Choice<T>| {
                    let mut stays = true;
                    let mut progress = false;
                    for t in c.support() {
                        stays &= y[t];
                        progress |= x[t];
                    }
                    stays && progress
                };
                let choices = pg.choices(s);
                let joins = if objective.maximizes(pg.player(s)) {
                    choices.iter().any(good)
                } else {
                    !choices.is_empty() && choices.iter().all(good)
                };
                if joins {
                    x[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if x == y {
            return y;
        }
        y = x;
    }
}

/// A maximal end component: its states and, per state, the choices that stay inside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndComponent {
    pub states: Vec<usize>,
    pub choices: Vec<(usize, Vec<usize>)>,
}

/// Maximal end components of the game viewed as one nondeterministic system,
/// by repeated SCC refinement. Components are sorted by smallest state.
pub fn find_mecs<T: Scalar>(pg: &ProductGame<T>) -> Vec<EndComponent> {
    let n = pg.num_states();
    let mut enabled: Vec<Vec<bool>> = (0..n).map(|s| vec![true; pg.choices(s).len()]).collect();
    let mut alive: Vec<bool> = (0..n).map(|s| !pg.choices(s).is_empty()).collect();
    let mut component = vec![usize::MAX; n];
    loop {
        let mut graph = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = (0..n).map(|s| graph.add_node(s)).collect();
        for s in (0..n).filter(|&s| alive[s]) {
            for (c, choice) in pg.choices(s).iter().enumerate() {
                if !enabled[s][c] {
                    continue;
                }
                for t in choice.support() {
                    if alive[t] {
                        graph.add_edge(nodes[s], nodes[t], ());
                    }
                }
            }
        }
        component.fill(usize::MAX);
        for (i, scc) in tarjan_scc(&graph).into_iter().enumerate() {
            for node in scc {
                component[graph[node]] = i;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            for (c, choice) in pg.choices(s).iter().enumerate() {
                if enabled[s][c] && choice.support().any(|t| !alive[t] || component[t] != component[s]) {
                    enabled[s][c] = false;
                    changed = true;
                }
            }
            if !enabled[s].iter().any(|&e| e) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for s in (0..n).filter(|&s| alive[s]) {
        groups.entry(component[s]).or_default().push(s);
    }
    let mut mecs: Vec<EndComponent> = groups
        .into_values()
        .map(|states| {
            let choices = states
                .iter()
                .map(|&s| (s, (0..enabled[s].len()).filter(|&c| enabled[s][c]).collect()))
                .collect();
            EndComponent { states, choices }
        })
        .collect();
    mecs.sort_by_key(|m| m.states[0]);
    mecs
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{retry, tiny};
    use super::*;
    use crate::model::{Choice, GameGraph, Player};

    #[test]
    fn tiny_game_sets() {
        let pg = tiny();
        assert_eq!(prob0(&pg, Objective::Maximize), vec![false, true, false, true]);
        assert_eq!(prob1(&pg, Objective::Maximize), vec![false, false, true, false]);
    }

    #[test]
    fn retry_loop_is_almost_sure() {
        assert_eq!(prob1(&retry(false), Objective::Maximize), vec![true, true, false]);
        assert_eq!(prob1(&retry(true), Objective::Maximize), vec![false, true, false]);
        assert_eq!(prob0(&retry(true), Objective::Maximize), vec![false, false, true]);
    }

    /// Human state 0: both actions touch the target. Human state 1: one action to sink.
    #[test]
    fn human_states_need_every_action() {
        let graph = GameGraph {
            player: vec![Player::Human, Player::Human, Player::Robot, Player::Robot, Player::Robot],
            choices: vec![
                vec![Choice::new("x", vec![(2, 0.5), (3, 0.5)]), Choice::new("y", vec![(2, 1.0)])],
                vec![Choice::new("x", vec![(2, 1.0)]), Choice::new("y", vec![(3, 1.0)])],
                vec![Choice::self_loop("stay", 2)],
                vec![Choice::self_loop("stay", 3)],
                vec![Choice::new("go", vec![(0, 1.0)])],
            ],
            initial: 4,
        };
        let pg = ProductGame::from_graph(graph, vec![false, false, true, false, false]);
        assert_eq!(prob0(&pg, Objective::Maximize), vec![false, true, false, true, false]);
        assert_eq!(prob1(&pg, Objective::Maximize), vec![false, false, true, false, false]);
        // with the senses swapped the human states only need one good action
        assert_eq!(prob1(&pg, Objective::Minimize), vec![true, true, true, false, true]);
    }

    #[test]
    fn mec_examples() {
        let pg = tiny();
        let mecs = find_mecs(&pg);
        let sets: Vec<Vec<usize>> = mecs.iter().map(|m| m.states.clone()).collect();
        // s0 -a-> s1 -back-> s0 is not closed because a can leave to the target
        assert_eq!(sets, vec![vec![2], vec![3]]);

        let cycle = GameGraph {
            player: vec![Player::Robot, Player::Human],
            choices: vec![vec![Choice::new("f", vec![(1, 1.0)])], vec![Choice::new("b", vec![(0, 1.0)])]],
            initial: 0,
        };
        let mecs = find_mecs(&ProductGame::from_graph(cycle, vec![false, false]));
        assert_eq!(mecs.len(), 1);
        assert_eq!(mecs[0].states, vec![0, 1]);
    }
}
