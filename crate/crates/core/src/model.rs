//! Explicit two-player game graphs shared by games, products and solvers.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Which player controls a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Robot,
    Human,
}

impl Player {
    /// Numeric id used in player files: 1 = robot, 2 = human.
    pub fn id(self) -> u8 {
        match self {
            Player::Robot => 1,
            Player::Human => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Player::Robot),
            2 => Some(Player::Human),
            _ => None,
        }
    }

    pub fn opponent(self) -> Self {
        match self {
            Player::Robot => Player::Human,
            Player::Human => Player::Robot,
        }
    }
}

/// One action available in a state together with its successor distribution.
///
/// Transitions are kept sorted by successor index with no duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice<T> {
    pub action: String,
    pub transitions: Vec<(usize, T)>,
}

impl<T: Scalar> Choice<T> {
    /// Builds a choice, merging duplicate successors and sorting by index.
    pub fn new(action: impl Into<String>, mut transitions: Vec<(usize, T)>) -> Self {
        transitions.sort_by_key(|&(dst, _)| dst);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(transitions.len());
        for (dst, p) in transitions {
            match merged.last_mut() {
                Some((last, acc)) if *last == dst => *acc = *acc + p,
                _ => merged.push((dst, p)),
            }
        }
        Choice {
            action: action.into(),
            transitions: merged,
        }
    }

    pub fn self_loop(action: impl Into<String>, state: usize) -> Self {
        Choice {
            action: action.into(),
            transitions: vec![(state, T::one())],
        }
    }

    pub fn total(&self) -> T {
        self.transitions.iter().map(|&(_, p)| p).sum()
    }

    pub fn expected(&self, values: &[T]) -> T {
        self.transitions
            .iter()
            .fold(T::zero(), |acc, &(dst, p)| acc + p * values[dst])
    }

    /// Successors reached with positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.transitions
            .iter()
            .filter(|(_, p)| *p > T::zero())
            .map(|&(dst, _)| dst)
    }

    pub fn is_self_loop(&self, state: usize) -> bool {
        self.support().all(|dst| dst == state)
    }
}

/// Turn-based game graph: a controller per state and a list of choices per state.
#[derive(Clone, Debug, PartialEq)]
pub struct GameGraph<T> {
    pub player: Vec<Player>,
    pub choices: Vec<Vec<Choice<T>>>,
    pub initial: usize,
}

impl<T: Scalar> GameGraph<T> {
    pub fn num_states(&self) -> usize {
        self.player.len()
    }

    pub fn num_choices(&self) -> usize {
        self.choices.iter().map(Vec::len).sum()
    }

    pub fn num_transitions(&self) -> usize {
        self.choices
            .iter()
            .flat_map(|cs| cs.iter())
            .map(|c| c.transitions.len())
            .sum()
    }

    /// Predecessor lists: for every state, the `(source, choice)` pairs that
    /// can move into it with positive probability.
    pub fn predecessors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut preds = vec![Vec::new(); self.num_states()];
        for (src, choices) in self.choices.iter().enumerate() {
            for (ci, choice) in choices.iter().enumerate() {
                for dst in choice.support() {
                    preds[dst].push((src, ci));
                }
            }
        }
        for list in &mut preds {
            list.dedup();
        }
        preds
    }

    /// A state is terminal when every available choice is a self-loop.
    pub fn is_terminal(&self, state: usize) -> bool {
        self.choices[state].iter().all(|c| c.is_self_loop(state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choice_merges_duplicate_successors() {
        let c = Choice::new("a", vec![(2, 0.25), (1, 0.5), (2, 0.25)]);
        assert_eq!(c.transitions, vec![(1, 0.5), (2, 0.5)]);
        assert_eq!(c.total(), 1.0);
        assert_eq!(c.expected(&[0.0, 1.0, 0.5]), 0.75);
    }

    #[test]
    fn player_ids_round_trip() {
        for p in [Player::Robot, Player::Human] {
            assert_eq!(Player::from_id(p.id()), Some(p));
        }
        assert_eq!(Player::from_id(3), None);
    }
}
