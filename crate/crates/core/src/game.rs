//! Two-player turn-based stochastic games built from a world and a turn model.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    ground_human_actions, ground_robot_actions, Arrangement, DomainError, Effect, GroundedAction, WorldSpec,
};
use crate::ltlf::{Label, Proposition};
use crate::model::{Choice, GameGraph, Player};
use crate::scalar::Scalar;

/// Proposition carried by states in which the human has stopped intervening.
pub const HUMAN_DONE: &str = "human_done";
/// Action name of the idle move offered when a state has no grounded action.
pub const STAY: &str = "stay";

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("game exceeds the configured capacity of {0} states")]
    Capacity(usize),
    #[error("invalid turn model: {0}")]
    TurnModel(String),
}

/// How control passes between robot and human.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TurnModelRepr", into = "TurnModelRepr")]
pub enum TurnModel {
    /// `robot` robot actions, then `human` human actions, repeating.
    Ratio { robot: u32, human: u32 },
    /// Strict alternation; after each human action the human stops for good with probability `p`.
    ProbTermination(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum TurnModelRepr {
    Ratio([u32; 2]),
    ProbTermination(f64),
}

impl TryFrom<TurnModelRepr> for TurnModel {
    type Error = GameError;

    fn try_from(repr: TurnModelRepr) -> Result<Self, GameError> {
        let tm = match repr {
            TurnModelRepr::Ratio([robot, human]) => TurnModel::Ratio { robot, human },
            TurnModelRepr::ProbTermination(p) => TurnModel::ProbTermination(p),
        };
        tm.validate()?;
        Ok(tm)
    }
}

impl From<TurnModel> for TurnModelRepr {
    fn from(tm: TurnModel) -> Self {
        match tm {
            TurnModel::Ratio { robot, human } => TurnModelRepr::Ratio([robot, human]),
            TurnModel::ProbTermination(p) => TurnModelRepr::ProbTermination(p),
        }
    }
}

impl TurnModel {
    pub fn ratio(robot: u32, human: u32) -> Self {
        TurnModel::Ratio { robot, human }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        match *self {
            TurnModel::Ratio { robot, human } if robot == 0 || human == 0 => {
                Err(GameError::TurnModel("ratio quotas must be positive".into()))
            }
            TurnModel::ProbTermination(p) if !(p > 0.0 && p <= 1.0) => {
                Err(GameError::TurnModel(format!("termination probability {p} is outside (0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

/// Textual form used on the command line: `ratio:2:1` or `prob_termination:0.05`.
impl fmt::Display for TurnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TurnModel::Ratio { robot, human } => write!(f, "ratio:{robot}:{human}"),
            TurnModel::ProbTermination(p) => write!(f, "prob_termination:{p}"),
        }
    }
}

impl FromStr for TurnModel {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        let bad = || GameError::TurnModel(format!("cannot parse '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        let tm = match parts.as_slice() {
            ["ratio", r, h] => TurnModel::Ratio {
                robot: r.parse().map_err(|_| bad())?,
                human: h.parse().map_err(|_| bad())?,
            },
            ["prob_termination" | "pt", p] => TurnModel::ProbTermination(p.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        tm.validate()?;
        Ok(tm)
    }
}

/// World-level game state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameState {
    pub arrangement: Arrangement,
    pub control: Player,
    /// Actions already taken by the controller in the current block (ratio model).
    pub counter: u32,
    /// Whether the human may still act (termination model).
    pub human_active: bool,
}

/// Turn-based stochastic game with state valuations and labels.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticGame<T> {
    pub graph: GameGraph<T>,
    /// Names of the integer state variables, in `.sta` column order.
    pub variables: Vec<String>,
    pub valuations: Vec<Vec<i64>>,
    pub labels: Vec<Label>,
    pub propositions: BTreeSet<Proposition>,
}

impl<T: Scalar> StochasticGame<T> {
    pub fn num_states(&self) -> usize {
        self.graph.num_states()
    }

    pub fn num_transitions(&self) -> usize {
        self.graph.num_transitions()
    }

    pub fn initial(&self) -> usize {
        self.graph.initial
    }
}

/// A game built from a pick-and-place world, keeping the decoded states.
#[derive(Clone, Debug)]
pub struct WorldGame<T> {
    pub game: StochasticGame<T>,
    pub states: Vec<GameState>,
    pub world: WorldSpec,
    pub turn_model: TurnModel,
}

fn successor_meta(tm: TurnModel, s: &GameState) -> (Player, u32) {
    match tm {
        TurnModel::Ratio { robot, human } => {
            let quota = if s.control == Player::Robot { robot } else { human };
            if s.counter + 1 < quota {
                (s.control, s.counter + 1)
            } else {
                (s.control.opponent(), 0)
            }
        }
        TurnModel::ProbTermination(_) => {
            if s.human_active {
                (s.control.opponent(), 0)
            } else {
                (Player::Robot, 0)
            }
        }
    }
}

/// A human who stops intervening puts down whatever it holds in `else`.
fn release_human_gripper(w: &WorldSpec, arr: &Arrangement) -> Arrangement {
    match arr.held_in(w.human_gripper) {
        Some(o) => arr.apply(Effect::Relocate { object: o, to: w.else_loc }),
        None => arr.clone(),
    }
}

/// Builds the reachable game from `init` with the robot to move first.
pub fn build_game<T: Scalar>(
    w: &WorldSpec,
    init: &Arrangement,
    tm: TurnModel,
    capacity: usize,
) -> Result<WorldGame<T>, GameError> {
    tm.validate()?;
    w.check_arrangement(init)?;
    let mut propositions = w.proposition_universe();
    if let TurnModel::ProbTermination(_) = tm {
        let done = Proposition::new(HUMAN_DONE).expect("valid name");
        if !propositions.insert(done) {
            return Err(DomainError::Config(format!("'{HUMAN_DONE}' is reserved")).into());
        }
    }
    let start = GameState {
        arrangement: init.clone(),
        control: Player::Robot,
        counter: 0,
        human_active: true,
    };
    let mut states = vec![start.clone()];
    let mut index: HashMap<GameState, usize> = HashMap::from([(start, 0)]);
    let mut choices: Vec<Vec<Choice<T>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut intern = |s: GameState, states: &mut Vec<GameState>, queue: &mut VecDeque<usize>| {
        if let Some(&i) = index.get(&s) {
            return Ok(i);
        }
        if states.len() >= capacity {
            return Err(GameError::Capacity(capacity));
        }
        let i = states.len();
        index.insert(s.clone(), i);
        states.push(s);
        queue.push_back(i);
        Ok(i)
    };

    while let Some(si) = queue.pop_front() {
        let s = states[si].clone();
        let actions: Vec<GroundedAction<T>> = match s.control {
            Player::Robot => ground_robot_actions(w, &s.arrangement),
            Player::Human => ground_human_actions(w, &s.arrangement),
        };
        let (next_control, next_counter) = successor_meta(tm, &s);
        let mut here = Vec::with_capacity(actions.len().max(1));
        for action in &actions {
            let mut transitions = Vec::new();
            for outcome in &action.outcomes {
                let arrangement = s.arrangement.apply(outcome.effect);
                let next = |human_active: bool| GameState {
                    arrangement: if human_active {
                        arrangement.clone()
                    } else {
                        release_human_gripper(w, &arrangement)
                    },
                    control: if human_active { next_control } else { Player::Robot },
                    counter: next_counter,
                    human_active,
                };
                match (tm, s.control) {
                    (TurnModel::ProbTermination(p), Player::Human) => {
                        let p = T::lit(p);
                        if p < T::one() {
                            let t = intern(next(true), &mut states, &mut queue)?;
                            transitions.push((t, outcome.prob * (T::one() - p)));
                        }
                        let t = intern(next(false), &mut states, &mut queue)?;
                        transitions.push((t, outcome.prob * p));
                    }
                    _ => {
                        let t = intern(next(s.human_active), &mut states, &mut queue)?;
                        transitions.push((t, outcome.prob));
                    }
                }
            }
            here.push(Choice::new(action.name(w), transitions));
        }
        if here.is_empty() {
            // No grounded action: the controller idles and the turn advances as usual.
            let idle = GameState {
                arrangement: s.arrangement.clone(),
                control: if s.human_active { next_control } else { Player::Robot },
                counter: next_counter,
                human_active: s.human_active,
            };
            let t = intern(idle, &mut states, &mut queue)?;
            here.push(Choice::new(STAY, vec![(t, T::one())]));
        }
        if choices.len() <= si {
            choices.resize_with(si + 1, Vec::new);
        }
        choices[si] = here;
    }

    let done = Proposition::new(HUMAN_DONE).expect("valid name");
    let labels = states
        .iter()
        .map(|s| {
            let mut label = w.label(&s.arrangement);
            if !s.human_active {
                label.insert(done.clone());
            }
            label
        })
        .collect();
    let mut variables = w.objects.clone();
    variables.push("turn".into());
    variables.push(match tm {
        TurnModel::Ratio { .. } => "counter".into(),
        TurnModel::ProbTermination(_) => "active".into(),
    });
    let valuations = states
        .iter()
        .map(|s| {
            let mut v: Vec<i64> = s.arrangement.0.iter().map(|&l| l as i64).collect();
            v.push(s.control.id() as i64);
            v.push(match tm {
                TurnModel::Ratio { .. } => s.counter as i64,
                TurnModel::ProbTermination(_) => s.human_active as i64,
            });
            v
        })
        .collect();
    let game = StochasticGame {
        graph: GameGraph {
            player: states.iter().map(|s| s.control).collect(),
            choices,
            initial: 0,
        },
        variables,
        valuations,
        labels,
        propositions,
    };
    Ok(WorldGame {
        game,
        states,
        world: w.clone(),
        turn_model: tm,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Normalization { state: usize, choice: usize, total: f64 },
    NegativeProbability { state: usize, choice: usize },
    DanglingSuccessor { state: usize, choice: usize, target: usize },
    Deadlock { state: usize },
    TurnPartition { state: usize },
    EndEffector { state: usize, choice: usize },
    Labeling { state: usize },
    Shape(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Normalization { state, choice, total } => {
                write!(f, "state {state} choice {choice}: probabilities sum to {total}")
            }
            Violation::NegativeProbability { state, choice } => {
                write!(f, "state {state} choice {choice}: negative probability")
            }
            Violation::DanglingSuccessor { state, choice, target } => {
                write!(f, "state {state} choice {choice}: successor {target} does not exist")
            }
            Violation::Deadlock { state } => write!(f, "state {state} has no actions"),
            Violation::TurnPartition { state } => {
                write!(f, "state {state} offers actions of the wrong player")
            }
            Violation::EndEffector { state, choice } => {
                write!(f, "state {state} choice {choice}: human action alters the robot gripper")
            }
            Violation::Labeling { state } => write!(f, "state {state}: label disagrees with arrangement"),
            Violation::Shape(m) => f.write_str(m),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Structural checks that apply to any game.
pub fn validate_game<T: Scalar>(g: &StochasticGame<T>) -> ValidationReport {
    let mut violations = Vec::new();
    let n = g.num_states();
    if g.graph.choices.len() != n || g.labels.len() != n || g.valuations.len() != n {
        violations.push(Violation::Shape("per-state vectors have inconsistent lengths".into()));
        return ValidationReport { violations };
    }
    if g.graph.initial >= n {
        violations.push(Violation::Shape("initial state out of range".into()));
    }
    for (state, choices) in g.graph.choices.iter().enumerate() {
        if choices.is_empty() {
            violations.push(Violation::Deadlock { state });
        }
        for (choice, c) in choices.iter().enumerate() {
            if c.transitions.iter().any(|&(_, p)| p < T::zero()) {
                violations.push(Violation::NegativeProbability { state, choice });
            }
            for &(target, _) in &c.transitions {
                if target >= n {
                    violations.push(Violation::DanglingSuccessor { state, choice, target });
                }
            }
            let total = c.total().as_f64();
            if (total - 1.0).abs() > T::NORMALIZATION_TOL {
                violations.push(Violation::Normalization { state, choice, total });
            }
        }
        if !g.labels[state].is_subset(&g.propositions) {
            violations.push(Violation::Labeling { state });
        }
        if g.valuations[state].len() != g.variables.len() {
            violations.push(Violation::Shape(format!("state {state} has a malformed valuation")));
        }
    }
    ValidationReport { violations }
}

impl<T: Scalar> WorldGame<T> {
    /// Structural checks plus the world-specific ones: the controller owns the
    /// offered actions, the human never alters the robot gripper and labels
    /// match arrangements.
    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_game(&self.game);
        if !report.is_ok() {
            return report;
        }
        let w = &self.world;
        let done = Proposition::new(HUMAN_DONE).expect("valid name");
        for (si, s) in self.states.iter().enumerate() {
            let offered: Vec<&str> = self.game.graph.choices[si].iter().map(|c| c.action.as_str()).collect();
            let expected: Vec<String> = match s.control {
                Player::Robot => ground_robot_actions::<T>(w, &s.arrangement).iter().map(|a| a.name(w)).collect(),
                Player::Human => ground_human_actions::<T>(w, &s.arrangement).iter().map(|a| a.name(w)).collect(),
            };
            let matches = if expected.is_empty() {
                offered == [STAY]
            } else {
                offered.iter().copied().eq(expected.iter().map(String::as_str))
            };
            if !matches || self.game.graph.player[si] != s.control {
                report.violations.push(Violation::TurnPartition { state: si });
            }
            if s.control == Player::Human {
                for (ci, c) in self.game.graph.choices[si].iter().enumerate() {
                    let alters = c.support().any(|t| {
                        let next = &self.states[t].arrangement;
                        s.arrangement.0.iter().zip(&next.0).any(|(&a, &b)| {
                            a != b && (a == w.robot_gripper || b == w.robot_gripper)
                        })
                    });
                    if alters {
                        report.violations.push(Violation::EndEffector { state: si, choice: ci });
                    }
                }
            }
            let mut label = w.label(&s.arrangement);
            if !s.human_active {
                label.insert(done.clone());
            }
            if label != self.game.labels[si] {
                report.violations.push(Violation::Labeling { state: si });
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{WorldConfig, DEFAULT_STATE_CAPACITY};

    fn world(objects: usize, extra_locations: usize) -> (WorldSpec, Arrangement) {
        let mut locations = vec!["robot_gripper".to_string(), "human_gripper".into(), "else".into()];
        locations.extend((1..=extra_locations).map(|i| format!("L{i}")));
        let objects: Vec<String> = (1..=objects).map(|i| format!("o{i}")).collect();
        let config = WorldConfig {
            init: objects.iter().map(|o| (o.clone(), "else".to_string())).collect(),
            propositions: objects
                .iter()
                .enumerate()
                .map(|(i, o)| crate::domain::PropositionDef {
                    name: format!("p_{o}_L{}", i + 1),
                    object: o.clone(),
                    location: format!("L{}", i + 1),
                })
                .collect(),
            objects,
            locations,
            robot_may_place_else: true,
            ..Default::default()
        };
        WorldSpec::from_config(&config).unwrap()
    }

    fn game(tm: TurnModel) -> WorldGame<f64> {
        let (w, s0) = world(1, 1);
        build_game(&w, &s0, tm, DEFAULT_STATE_CAPACITY).unwrap()
    }

    #[test]
    fn turn_model_json_and_text_forms() {
        let tm: TurnModel = serde_json::from_str(r#"{"ratio":[2,1]}"#).unwrap();
        assert_eq!(tm, TurnModel::ratio(2, 1));
        let tm: TurnModel = serde_json::from_str(r#"{"prob_termination":0.05}"#).unwrap();
        assert_eq!(tm, TurnModel::ProbTermination(0.05));
        assert!(serde_json::from_str::<TurnModel>(r#"{"ratio":[0,1]}"#).is_err());
        assert!(serde_json::from_str::<TurnModel>(r#"{"prob_termination":0}"#).is_err());
        assert_eq!("ratio:1:1".parse::<TurnModel>().unwrap(), TurnModel::ratio(1, 1));
        assert_eq!("pt:0.5".parse::<TurnModel>().unwrap(), TurnModel::ProbTermination(0.5));
        assert_eq!(TurnModel::ratio(4, 2).to_string(), "ratio:4:2");
        assert!("ratio:1".parse::<TurnModel>().is_err());
    }

    #[test]
    fn built_games_validate() {
        for tm in [TurnModel::ratio(1, 1), TurnModel::ratio(2, 1), TurnModel::ProbTermination(0.05)] {
            let g = game(tm);
            let report = g.validate();
            assert!(report.is_ok(), "{tm}: {:?}", report.violations);
        }
    }

    #[test]
    fn ratio_one_one_alternates() {
        let g = game(TurnModel::ratio(1, 1));
        for (s, choices) in g.game.graph.choices.iter().enumerate() {
            for c in choices {
                for t in c.support() {
                    assert_ne!(g.states[s].control, g.states[t].control);
                }
            }
        }
    }

    #[test]
    fn termination_split_is_ninety_five_five() {
        let g = game(TurnModel::ProbTermination(0.05));
        let mut seen = 0;
        for (s, choices) in g.game.graph.choices.iter().enumerate() {
            if g.states[s].control != Player::Human {
                continue;
            }
            for c in choices {
                let active: f64 = c.transitions.iter().filter(|(t, _)| g.states[*t].human_active).map(|x| x.1).sum();
                let inactive: f64 = c.transitions.iter().filter(|(t, _)| !g.states[*t].human_active).map(|x| x.1).sum();
                assert!((active - 0.95).abs() < 1e-12 && (inactive - 0.05).abs() < 1e-12);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn inactive_states_are_robot_only_and_labeled() {
        let g = game(TurnModel::ProbTermination(0.3));
        let done = Proposition::new(HUMAN_DONE).unwrap();
        for (s, st) in g.states.iter().enumerate() {
            if !st.human_active {
                assert_eq!(st.control, Player::Robot);
                assert!(g.game.labels[s].contains(&done));
                for c in &g.game.graph.choices[s] {
                    assert!(c.support().all(|t| !g.states[t].human_active));
                }
            }
        }
    }

    #[test]
    fn ratio_four_two_differs_from_two_one() {
        let (w, s0) = world(1, 2);
        let a = build_game::<f64>(&w, &s0, TurnModel::ratio(2, 1), DEFAULT_STATE_CAPACITY).unwrap();
        let b = build_game::<f64>(&w, &s0, TurnModel::ratio(4, 2), DEFAULT_STATE_CAPACITY).unwrap();
        assert_ne!(a.game.num_states(), b.game.num_states());
    }

    #[test]
    fn every_arrangement_has_a_robot_state() {
        let (w, s0) = world(2, 2);
        for tm in [TurnModel::ratio(1, 2), TurnModel::ratio(3, 1), TurnModel::ProbTermination(0.1)] {
            let g = build_game::<f64>(&w, &s0, tm, DEFAULT_STATE_CAPACITY).unwrap();
            let robot: BTreeSet<_> = g.states.iter().filter(|s| s.control == Player::Robot).map(|s| s.arrangement.clone()).collect();
            assert!(g.states.iter().all(|s| robot.contains(&s.arrangement)), "{tm}");
        }
    }

    #[test]
    fn corrupted_distribution_is_reported() {
        let mut g = game(TurnModel::ratio(1, 1));
        g.game.graph.choices[0][0].transitions[0].1 = 0.9;
        let report = g.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Normalization { state: 0, choice: 0, .. })));
    }

    #[test]
    fn human_touching_robot_gripper_is_reported() {
        let mut g = game(TurnModel::ratio(1, 1));
        let rg = g.world.robot_gripper;
        let held = g.states.iter().position(|s| s.arrangement.0[0] == rg && s.control == Player::Robot).unwrap();
        let human = g.states.iter().position(|s| s.control == Player::Human && s.arrangement.0[0] != rg).unwrap();
        g.game.graph.choices[human].push(Choice::new("snatch", vec![(held, 1.0)]));
        let report = g.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::EndEffector { .. })));
    }

    #[test]
    fn capacity_bound() {
        let (w, s0) = world(2, 2);
        assert!(matches!(
            build_game::<f64>(&w, &s0, TurnModel::ratio(1, 1), 3),
            Err(GameError::Capacity(3))
        ));
    }
}
