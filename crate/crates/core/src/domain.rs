//! Grounding of pick-and-place worlds into a probabilistic manipulation MDP.
//!
//! A world is a set of objects, a set of locations (always including the
//! catch-all `else` region and the two grippers), robot success rates and
//! optional human-side parameters. States are arrangements: one location per
//! object.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltlf::{Label, Proposition};
use crate::model::{Choice, Player};
use crate::scalar::Scalar;

pub const ELSE: &str = "else";
pub const ROBOT_GRIPPER: &str = "robot_gripper";
pub const HUMAN_GRIPPER: &str = "human_gripper";

/// Default bound on explored states for every state-space construction.
pub const DEFAULT_STATE_CAPACITY: usize = 5_000_000;

pub type ObjId = usize;
pub type LocId = u16;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid world: {0}")]
    Config(String),
    #[error("invalid arrangement: {0}")]
    Arrangement(String),
    #[error("state space exceeds the configured capacity of {0} states")]
    Capacity(usize),
    #[error("malformed world json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Success rates of the robot's two atomic actions for one object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSuccess {
    #[serde(default = "one")]
    pub grasp: f64,
    #[serde(default = "one")]
    pub place: f64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl Default for ActionSuccess {
    fn default() -> Self {
        ActionSuccess { grasp: 1.0, place: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanLikelihood {
    pub object: String,
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// Proposition `name` holds when `object` is at `location`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropositionDef {
    pub name: String,
    pub object: String,
    pub location: String,
}

/// JSON schema of a world description. See `docs/scenario-format.md`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub objects: Vec<String>,
    pub locations: Vec<String>,
    pub init: BTreeMap<String, String>,
    #[serde(default)]
    pub robot_success: BTreeMap<String, ActionSuccess>,
    #[serde(default)]
    pub human_likelihood: Vec<HumanLikelihood>,
    #[serde(default)]
    pub human_success: BTreeMap<String, f64>,
    #[serde(default)]
    pub propositions: Vec<PropositionDef>,
    #[serde(default)]
    pub stacking: Vec<[String; 2]>,
    #[serde(default)]
    pub capacities: BTreeMap<String, usize>,
    #[serde(default = "yes")]
    pub robot_may_place_else: bool,
}

/// Validated, index-based world.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldSpec {
    pub objects: Vec<String>,
    pub locations: Vec<String>,
    pub else_loc: LocId,
    pub robot_gripper: LocId,
    pub human_gripper: LocId,
    /// Per object: (grasp success, place success).
    pub robot_success: Vec<ActionSuccess>,
    /// Per object probability that a human move succeeds (1 by default).
    pub human_success: Vec<f64>,
    /// Weight of a human move; a zero weight removes the move.
    pub human_likelihood: HashMap<(ObjId, LocId, LocId), f64>,
    /// `None` means unbounded.
    pub capacities: Vec<Option<usize>>,
    /// `(lower, upper)`: an object at `lower` cannot be grasped while `upper` is occupied.
    pub stacking: Vec<(LocId, LocId)>,
    pub robot_may_place_else: bool,
    pub propositions: Vec<(Proposition, ObjId, LocId)>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphanumeric())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_probability(what: &str, p: f64) -> Result<(), DomainError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(DomainError::Config(format!("{what} = {p} is not a probability")))
    }
}

impl WorldSpec {
    pub fn from_json(text: &str) -> Result<(WorldSpec, Arrangement), DomainError> {
        let config: WorldConfig = serde_json::from_str(text)?;
        WorldSpec::from_config(&config)
    }

    /// Validates a configuration and returns the world with its initial arrangement.
    pub fn from_config(config: &WorldConfig) -> Result<(WorldSpec, Arrangement), DomainError> {
        let cfg = |m: String| DomainError::Config(m);
        for name in config.objects.iter().chain(&config.locations) {
            if !is_identifier(name) {
                return Err(cfg(format!("'{name}' is not a valid object or location name")));
            }
        }
        let unique = |names: &[String], what: &str| -> Result<(), DomainError> {
            let set: BTreeSet<&String> = names.iter().collect();
            if set.len() != names.len() {
                return Err(DomainError::Config(format!("duplicate {what} names")));
            }
            Ok(())
        };
        unique(&config.objects, "object")?;
        unique(&config.locations, "location")?;
        if config.locations.len() > LocId::MAX as usize {
            return Err(cfg("too many locations".into()));
        }
        let loc = |name: &str| -> Result<LocId, DomainError> {
            config
                .locations
                .iter()
                .position(|l| l == name)
                .map(|i| i as LocId)
                .ok_or_else(|| DomainError::Config(format!("unknown location '{name}'")))
        };
        let obj = |name: &str| -> Result<ObjId, DomainError> {
            config
                .objects
                .iter()
                .position(|o| o == name)
                .ok_or_else(|| DomainError::Config(format!("unknown object '{name}'")))
        };
        let else_loc = loc(ELSE)?;
        let robot_gripper = loc(ROBOT_GRIPPER)?;
        let human_gripper = loc(HUMAN_GRIPPER)?;

        let mut robot_success = vec![ActionSuccess::default(); config.objects.len()];
        for (name, rates) in &config.robot_success {
            check_probability(&format!("robot_success.{name}.grasp"), rates.grasp)?;
            check_probability(&format!("robot_success.{name}.place"), rates.place)?;
            robot_success[obj(name)?] = *rates;
        }
        let mut human_success = vec![1.0; config.objects.len()];
        for (name, &p) in &config.human_success {
            check_probability(&format!("human_success.{name}"), p)?;
            human_success[obj(name)?] = p;
        }
        let mut human_likelihood = HashMap::new();
        for h in &config.human_likelihood {
            if !(h.weight >= 0.0 && h.weight.is_finite()) {
                return Err(cfg(format!("human_likelihood weight {} must be non-negative", h.weight)));
            }
            human_likelihood.insert((obj(&h.object)?, loc(&h.from)?, loc(&h.to)?), h.weight);
        }
        let mut capacities = vec![None; config.locations.len()];
        for (name, &cap) in &config.capacities {
            let l = loc(name)?;
            if l == else_loc {
                return Err(cfg("the else region is unbounded".into()));
            }
            capacities[l as usize] = Some(cap);
        }
        capacities[robot_gripper as usize] = Some(1);
        capacities[human_gripper as usize] = Some(1);
        let stacking = config
            .stacking
            .iter()
            .map(|[lower, upper]| Ok((loc(lower)?, loc(upper)?)))
            .collect::<Result<Vec<_>, DomainError>>()?;
        let mut propositions = Vec::new();
        let mut seen = BTreeSet::new();
        for def in &config.propositions {
            let p = Proposition::new(def.name.clone()).map_err(|e| cfg(e.to_string()))?;
            if !seen.insert(p.clone()) {
                return Err(cfg(format!("duplicate proposition '{p}'")));
            }
            propositions.push((p, obj(&def.object)?, loc(&def.location)?));
        }

        let world = WorldSpec {
            objects: config.objects.clone(),
            locations: config.locations.clone(),
            else_loc,
            robot_gripper,
            human_gripper,
            robot_success,
            human_success,
            human_likelihood,
            capacities,
            stacking,
            robot_may_place_else: config.robot_may_place_else,
            propositions,
        };

        let mut placement = Vec::with_capacity(config.objects.len());
        for o in &config.objects {
            let at = config
                .init
                .get(o)
                .ok_or_else(|| cfg(format!("object '{o}' has no initial location")))?;
            placement.push(loc(at)?);
        }
        if config.init.len() != config.objects.len() {
            return Err(cfg("init mentions unknown objects".into()));
        }
        let init = Arrangement(placement);
        world.check_arrangement(&init)?;
        Ok((world, init))
    }

    pub fn is_gripper(&self, l: LocId) -> bool {
        l == self.robot_gripper || l == self.human_gripper
    }

    pub fn location_id(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|l| l == name).map(|i| i as LocId)
    }

    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.objects.iter().position(|o| o == name)
    }

    fn has_room(&self, arr: &Arrangement, l: LocId) -> bool {
        match self.capacities[l as usize] {
            None => true,
            Some(cap) => arr.count_at(l) < cap,
        }
    }

    /// Checks gripper exclusivity and location capacities.
    pub fn check_arrangement(&self, arr: &Arrangement) -> Result<(), DomainError> {
        if arr.0.len() != self.objects.len() {
            return Err(DomainError::Arrangement(format!(
                "expected {} objects, found {}",
                self.objects.len(),
                arr.0.len()
            )));
        }
        for (l, cap) in self.capacities.iter().enumerate() {
            if arr.0.iter().any(|&x| x as usize >= self.locations.len()) {
                return Err(DomainError::Arrangement("unknown location index".into()));
            }
            if let Some(cap) = cap {
                let count = arr.count_at(l as LocId);
                if count > *cap {
                    return Err(DomainError::Arrangement(format!(
                        "{count} objects at '{}' (capacity {cap})",
                        self.locations[l]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Propositions that hold in `arr`.
    pub fn label(&self, arr: &Arrangement) -> Label {
        self.propositions
            .iter()
            .filter(|(_, o, l)| arr.0[*o] == *l)
            .map(|(p, _, _)| p.clone())
            .collect()
    }

    pub fn proposition_universe(&self) -> BTreeSet<Proposition> {
        self.propositions.iter().map(|(p, _, _)| p.clone()).collect()
    }

    fn supports_occupied(&self, arr: &Arrangement, l: LocId) -> bool {
        self.stacking
            .iter()
            .any(|&(lower, upper)| lower == l && arr.count_at(upper) > 0)
    }
}

/// Location of every object, indexed by object id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrangement(pub Vec<LocId>);

impl Arrangement {
    pub fn location_of(&self, o: ObjId) -> LocId {
        self.0[o]
    }

    pub fn count_at(&self, l: LocId) -> usize {
        self.0.iter().filter(|&&x| x == l).count()
    }

    pub fn held_in(&self, gripper: LocId) -> Option<ObjId> {
        self.0.iter().position(|&x| x == gripper)
    }

    pub fn apply(&self, effect: Effect) -> Arrangement {
        match effect {
            Effect::Unchanged => self.clone(),
            Effect::Relocate { object, to } => {
                let mut next = self.clone();
                next.0[object] = to;
                next
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Grasp,
    Place,
    Move,
    Wait,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Effect {
    Unchanged,
    Relocate { object: ObjId, to: LocId },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<T> {
    pub effect: Effect,
    pub prob: T,
}

/// A concrete action applicable in a given arrangement.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundedAction<T> {
    pub actor: Player,
    pub kind: ActionKind,
    pub object: Option<ObjId>,
    pub from: Option<LocId>,
    pub to: Option<LocId>,
    pub outcomes: Vec<Outcome<T>>,
    /// Configured human likelihood weight, carried for display only.
    pub likelihood: Option<f64>,
}

impl<T: Scalar> GroundedAction<T> {
    pub fn name(&self, w: &WorldSpec) -> String {
        let obj = |o: Option<ObjId>| o.map_or("", |o| w.objects[o].as_str());
        let loc = |l: Option<LocId>| l.map_or("", |l| w.locations[l as usize].as_str());
        match self.kind {
            ActionKind::Grasp => format!("grasp_{}_{}", obj(self.object), loc(self.from)),
            ActionKind::Place => format!("place_{}_{}", obj(self.object), loc(self.to)),
            ActionKind::Move => format!("move_{}_{}_{}", obj(self.object), loc(self.from), loc(self.to)),
            ActionKind::Wait => "wait".to_string(),
        }
    }

    /// Stochastic outcome list of a relocation that succeeds with probability `p`.
    fn relocation(object: ObjId, to: LocId, p: f64) -> Vec<Outcome<T>> {
        let success = Outcome {
            effect: Effect::Relocate { object, to },
            prob: T::lit(p),
        };
        if p >= 1.0 {
            vec![success]
        } else if p <= 0.0 {
            vec![Outcome {
                effect: Effect::Unchanged,
                prob: T::one(),
            }]
        } else {
            vec![
                success,
                Outcome {
                    effect: Effect::Unchanged,
                    prob: T::one() - T::lit(p),
                },
            ]
        }
    }
}

/// Robot grasp and place actions applicable in `s`, objects and then
/// destinations in index order.
pub fn ground_robot_actions<T: Scalar>(w: &WorldSpec, s: &Arrangement) -> Vec<GroundedAction<T>> {
    let mut out = Vec::new();
    match s.held_in(w.robot_gripper) {
        None => {
            for (o, &at) in s.0.iter().enumerate() {
                if w.is_gripper(at) || w.supports_occupied(s, at) {
                    continue;
                }
                out.push(GroundedAction {
                    actor: Player::Robot,
                    kind: ActionKind::Grasp,
                    object: Some(o),
                    from: Some(at),
                    to: Some(w.robot_gripper),
                    outcomes: GroundedAction::relocation(o, w.robot_gripper, w.robot_success[o].grasp),
                    likelihood: None,
                });
            }
        }
        Some(o) => {
            for l in 0..w.locations.len() as LocId {
                if w.is_gripper(l) || !w.has_room(s, l) {
                    continue;
                }
                if l == w.else_loc && !w.robot_may_place_else {
                    continue;
                }
                out.push(GroundedAction {
                    actor: Player::Robot,
                    kind: ActionKind::Place,
                    object: Some(o),
                    from: Some(w.robot_gripper),
                    to: Some(l),
                    outcomes: GroundedAction::relocation(o, l, w.robot_success[o].place),
                    likelihood: None,
                });
            }
        }
    }
    out
}

/// Human moves applicable in `s` followed by `wait`. Objects in the robot
/// gripper are never touched.
pub fn ground_human_actions<T: Scalar>(w: &WorldSpec, s: &Arrangement) -> Vec<GroundedAction<T>> {
    let mut out = Vec::new();
    for (o, &at) in s.0.iter().enumerate() {
        if at == w.robot_gripper {
            continue;
        }
        for l in 0..w.locations.len() as LocId {
            if l == at || l == w.robot_gripper || !w.has_room(s, l) {
                continue;
            }
            let likelihood = w.human_likelihood.get(&(o, at, l)).copied();
            if likelihood == Some(0.0) {
                continue;
            }
            out.push(GroundedAction {
                actor: Player::Human,
                kind: ActionKind::Move,
                object: Some(o),
                from: Some(at),
                to: Some(l),
                outcomes: GroundedAction::relocation(o, l, w.human_success[o]),
                likelihood,
            });
        }
    }
    out.push(GroundedAction {
        actor: Player::Human,
        kind: ActionKind::Wait,
        object: None,
        from: None,
        to: None,
        outcomes: vec![Outcome {
            effect: Effect::Unchanged,
            prob: T::one(),
        }],
        likelihood: None,
    });
    out
}

/// Robot-only abstraction: arrangements reachable under robot actions.
#[derive(Clone, Debug, PartialEq)]
pub struct Mdp<T> {
    pub states: Vec<Arrangement>,
    pub initial: usize,
    /// Per state, one choice per grounded robot action.
    pub actions: Vec<Vec<Choice<T>>>,
    pub propositions: BTreeSet<Proposition>,
    pub labels: Vec<Label>,
}

impl<T: Scalar> Mdp<T> {
    pub fn num_transitions(&self) -> usize {
        self.actions.iter().flatten().map(|c| c.transitions.len()).sum()
    }
}

/// Breadth-first closure of `init` under robot actions.
pub fn build_mdp<T: Scalar>(w: &WorldSpec, init: &Arrangement, capacity: usize) -> Result<Mdp<T>, DomainError> {
    w.check_arrangement(init)?;
    let mut index: HashMap<Arrangement, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    index.insert(init.clone(), 0);
    let mut actions = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let arr = states[s].clone();
        let mut choices = Vec::new();
        for action in ground_robot_actions::<T>(w, &arr) {
            let mut transitions = Vec::with_capacity(action.outcomes.len());
            for outcome in &action.outcomes {
                let next = arr.apply(outcome.effect);
                debug_assert!(w.check_arrangement(&next).is_ok());
                let t = match index.get(&next) {
                    Some(&t) => t,
                    None => {
                        if states.len() >= capacity {
                            return Err(DomainError::Capacity(capacity));
                        }
                        let t = states.len();
                        index.insert(next.clone(), t);
                        states.push(next);
                        queue.push_back(t);
                        t
                    }
                };
                transitions.push((t, outcome.prob));
            }
            choices.push(Choice::new(action.name(w), transitions));
        }
        if actions.len() <= s {
            actions.resize(s + 1, Vec::new());
        }
        actions[s] = choices;
    }
    let labels = states.iter().map(|a| w.label(a)).collect();
    Ok(Mdp {
        states,
        initial: 0,
        actions,
        propositions: w.proposition_universe(),
        labels,
    })
}
