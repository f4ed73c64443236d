//! Seeded generator of small random games for testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::StochasticGame;
use crate::ltlf::{Label, Proposition};
use crate::model::{Choice, GameGraph, Player};
use crate::product::ProductGame;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct RandomGameParams {
    pub min_states: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_successors: usize,
    /// Upper bound on the number of pure memoryless strategy profiles.
    pub max_profiles: u64,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams {
            min_states: 3,
            max_states: 50,
            max_actions: 4,
            max_successors: 3,
            max_profiles: 2048,
        }
    }
}

/// Random game graph with a target mask. The last one to three states are
/// targets and there is at least one absorbing sink; every other state gets
/// one or more choices while the number of strategy profiles stays bounded.
pub fn random_graph<T: Scalar>(seed: u64, params: &RandomGameParams) -> (GameGraph<T>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(params.min_states.max(3)..=params.max_states.max(3));
    let targets = rng.random_range(1..=3.min(n - 2));
    let sinks = rng.random_range(1..=2.min(n - targets - 1));
    let inner = n - targets - sinks;
    let mut target = vec![false; n];
    let mut player = Vec::with_capacity(n);
    let mut choices = Vec::with_capacity(n);
    let mut profiles: u64 = 1;
    for s in 0..n {
        player.push(if rng.random_bool(0.5) { Player::Robot } else { Player::Human });
        if s >= inner {
            target[s] = s >= inner + sinks;
            choices.push(vec![Choice::self_loop("stay", s)]);
            continue;
        }
        let mut k = 1;
        if rng.random_bool(0.4) {
            let wanted = rng.random_range(2..=params.max_actions.max(1));
            while k < wanted && profiles * (k as u64 + 1) <= params.max_profiles {
                k += 1;
            }
            profiles *= k as u64;
        }
        let mut here = Vec::with_capacity(k);
        for a in 0..k {
            let m = rng.random_range(1..=params.max_successors.max(1));
            let mut succ = Vec::with_capacity(m);
            let mut weights = Vec::with_capacity(m);
            for _ in 0..m {
                succ.push(rng.random_range(0..n));
                weights.push(rng.random_range(1u32..=9));
            }
            let total: u32 = weights.iter().sum();
            let transitions = succ
                .into_iter()
                .zip(weights)
                .map(|(t, w)| (t, T::lit(w as f64 / total as f64)))
                .collect();
            here.push(Choice::new(format!("a{a}"), transitions));
        }
        choices.push(here);
    }
    (
        GameGraph {
            player,
            choices,
            initial: 0,
        },
        target,
    )
}

pub fn random_product<T: Scalar>(seed: u64, params: &RandomGameParams) -> ProductGame<T> {
    let (graph, target) = random_graph(seed, params);
    ProductGame::from_graph(graph, target)
}

/// Random game with labels over `{p, q, r}` and two integer variables, for
/// format round trips.
pub fn random_game<T: Scalar>(seed: u64, params: &RandomGameParams) -> StochasticGame<T> {
    let (graph, target) = random_graph(seed, params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let props: Vec<Proposition> = ["p", "q", "r"].iter().map(|p| Proposition::new(*p).expect("valid")).collect();
    let labels = (0..graph.num_states())
        .map(|s| {
            let mut l = Label::empty();
            if target[s] {
                l.insert(props[0].clone());
            }
            for p in &props[1..] {
                if rng.random_bool(0.3) {
                    l.insert(p.clone());
                }
            }
            l
        })
        .collect();
    let valuations = (0..graph.num_states())
        .map(|s| vec![s as i64, rng.random_range(-5..=5)])
        .collect();
    StochasticGame {
        graph,
        variables: vec!["s".into(), "z".into()],
        valuations,
        labels,
        propositions: props.into_iter().collect(),
    }
}
