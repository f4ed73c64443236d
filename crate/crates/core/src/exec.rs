//! Live execution of synthesized strategies: sessions in which a human plays
//! against the robot's strategy with sampled outcomes.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::domain::DEFAULT_STATE_CAPACITY;
use crate::game::StochasticGame;
use crate::ltlf::{parse, Formula, LtlfError};
use crate::model::Player;
use crate::pipeline::{synthesize_task, PipelineError};
use crate::product::ProductGame;
use crate::scenarios::{Scenario, ScenarioSummary};
use crate::solver::{Objective, SolverOptions, Strategy, ValueVector};

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("unknown session '{0}'")]
    UnknownSession(String),
    #[error("synthesis failed: {message}")]
    Synthesis { message: String, detail: Value },
    #[error("it is not the {0}'s turn")]
    NotYourTurn(&'static str),
    #[error("illegal move '{0}'")]
    IllegalMove(String),
    #[error("the game is over")]
    Terminal,
}

impl ExecError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            ExecError::UnknownScenario(_) => "unknown_scenario",
            ExecError::UnknownSession(_) => "unknown_session",
            ExecError::Synthesis { .. } => "synthesis_error",
            ExecError::NotYourTurn(_) => "not_your_turn",
            ExecError::IllegalMove(_) => "illegal_move",
            ExecError::Terminal => "terminal",
        }
    }

    pub fn detail(&self) -> Value {
        match self {
            ExecError::Synthesis { detail, .. } => detail.clone(),
            ExecError::UnknownScenario(s) => json!({ "scenario": s }),
            ExecError::UnknownSession(s) => json!({ "session": s }),
            ExecError::IllegalMove(a) => json!({ "action": a }),
            ExecError::NotYourTurn(who) => json!({ "expected": who }),
            ExecError::Terminal => Value::Null,
        }
    }
}

fn synthesis_error(e: impl std::fmt::Display, detail: Value) -> ExecError {
    ExecError::Synthesis {
        message: e.to_string(),
        detail,
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub epsilon: f64,
    pub state_capacity: usize,
    /// Accept human moves during the robot's turn (see [`Engine::apply_human_move`]).
    pub interruptible: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            epsilon: 1e-6,
            state_capacity: DEFAULT_STATE_CAPACITY,
            interruptible: false,
        }
    }
}

/// A solved scenario/task pair shared by all sessions that use it.
#[derive(Debug)]
pub struct Solved {
    pub scenario: Arc<Scenario>,
    pub formula: Formula,
    pub objective: Objective,
    pub game: StochasticGame<f64>,
    pub product: ProductGame<f64>,
    pub values: ValueVector<f64>,
    pub strategy: Strategy,
    pair_index: HashMap<(usize, usize), usize>,
    valuation_index: HashMap<Vec<i64>, usize>,
}

impl Solved {
    fn is_terminal(&self, s: usize) -> bool {
        self.product.target[s] || self.product.graph.is_terminal(s)
    }

    fn game_state(&self, s: usize) -> usize {
        self.product.pairs[s].0
    }

    fn scene(&self, s: usize) -> Value {
        self.scenario.render(&self.game.valuations[self.game_state(s)])
    }

    fn outcome(&self, s: usize, probability: f64) -> OutcomeView {
        OutcomeView {
            state: s,
            probability,
            scene: self.scene(s),
            labels: self.product.labels[s].iter().map(|p| p.to_string()).collect(),
        }
    }

    /// The product state a human interruption starts from: same arrangement
    /// and automaton state, human to move, counters reset.
    fn interrupt_state(&self, s: usize) -> Option<usize> {
        let (g, q) = self.product.pairs[s];
        let mut valuation = self.game.valuations[g].clone();
        let var = |name: &str| self.game.variables.iter().position(|v| v == name);
        valuation[var("turn")?] = Player::Human.id() as i64;
        if let Some(c) = var("counter") {
            valuation[c] = 0;
        }
        let g2 = *self.valuation_index.get(&valuation)?;
        self.pair_index.get(&(g2, q)).copied()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryEntry {
    pub actor: Player,
    pub action: String,
    pub from: usize,
    pub to: usize,
    /// Set when a human move was accepted out of turn.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub interrupted: bool,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub solved: Arc<Solved>,
    pub seed: u64,
    pub current: usize,
    pub history: Vec<HistoryEntry>,
    pub interruptible: bool,
    rng: ChaCha8Rng,
}

impl Session {
    fn sample(&mut self, transitions: &[(usize, f64)]) -> usize {
        // 53 random bits give a uniform double in [0, 1).
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let mut acc = 0.0;
        for &(t, p) in transitions {
            acc += p;
            if u < acc {
                return t;
            }
        }
        transitions.iter().rev().find(|(_, p)| *p > 0.0).map_or(transitions[0].0, |x| x.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeView {
    pub state: usize,
    pub probability: f64,
    pub scene: Value,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoveView {
    pub action: String,
    /// Expected value of the action under the solved values.
    pub expected: f64,
    pub outcomes: Vec<OutcomeView>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionValue {
    pub action: String,
    pub expected: f64,
    pub chosen: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateView {
    pub session_id: String,
    pub scenario: String,
    pub formula: String,
    pub objective: Objective,
    pub seed: u64,
    pub state: usize,
    pub controller: Player,
    pub variables: BTreeMap<String, i64>,
    pub scene: Value,
    pub labels: Vec<String>,
    pub value: f64,
    pub target: bool,
    pub terminal: bool,
    pub history: Vec<HistoryEntry>,
    /// Per-action expected values on robot turns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robot_actions: Option<Vec<ActionValue>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepResult {
    pub actor: Player,
    pub action: String,
    pub outcome: OutcomeView,
    pub view: StateView,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    scenario: u64,
    formula: String,
    objective: Objective,
    epsilon: u64,
}

/// Scenario registry, strategy cache and session table.
pub struct Engine {
    scenarios: BTreeMap<String, Arc<Scenario>>,
    config: EngineConfig,
    cache: Mutex<HashMap<CacheKey, Arc<Solved>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    counter: AtomicU64,
}

impl Engine {
    pub fn new(scenarios: Vec<Scenario>, config: EngineConfig) -> Self {
        Engine {
            scenarios: scenarios.into_iter().map(|s| (s.name.clone(), Arc::new(s))).collect(),
            config,
            cache: Mutex::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
            counter: AtomicU64::new(0),
        }
    }

    pub fn scenarios(&self) -> Vec<ScenarioSummary> {
        self.scenarios.values().map(|s| s.summary()).collect()
    }

    /// Solves (or fetches from the cache) a scenario with a task.
    pub fn solve(&self, scenario: &str, formula: Option<&str>, objective: Option<Objective>) -> Result<Arc<Solved>, ExecError> {
        let sc = self
            .scenarios
            .get(scenario)
            .cloned()
            .ok_or_else(|| ExecError::UnknownScenario(scenario.to_string()))?;
        let formula = match formula {
            None => sc.formula.clone(),
            Some(text) => parse(text).map_err(|e| {
                let detail = match &e {
                    LtlfError::Syntax { offset, .. } => json!({ "kind": "syntax", "offset": offset }),
                    _ => Value::Null,
                };
                synthesis_error(e, detail)
            })?,
        };
        let objective = objective.unwrap_or(sc.objective);
        let key = CacheKey {
            scenario: sc.content_hash,
            formula: formula.to_string(),
            objective,
            epsilon: self.config.epsilon.to_bits(),
        };
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let game = sc
            .build_game::<f64>(self.config.state_capacity)
            .map_err(|e| synthesis_error(e, Value::Null))?;
        let opts = SolverOptions {
            epsilon: self.config.epsilon,
            objective,
            ..SolverOptions::default()
        };
        let done = synthesize_task(&game, &formula, &opts).map_err(|e| {
            let detail = match &e {
                PipelineError::Ltlf(_) => json!({ "kind": "formula" }),
                _ => Value::Null,
            };
            synthesis_error(e, detail)
        })?;
        let product = done.product;
        let solved = Arc::new(Solved {
            pair_index: product.pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect(),
            valuation_index: game.valuations.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect(),
            scenario: sc,
            formula,
            objective,
            game,
            values: done.synthesis.values,
            strategy: done.synthesis.strategy,
            product,
        });
        let mut cache = self.cache.lock().expect("cache lock");
        Ok(cache.entry(key).or_insert(solved).clone())
    }

    /// Starts a session at the product's initial state.
    pub fn new_session(
        &self,
        scenario: &str,
        formula: Option<&str>,
        objective: Option<Objective>,
        seed: Option<u64>,
    ) -> Result<String, ExecError> {
        let solved = self.solve(scenario, formula, objective)?;
        let seed = seed.unwrap_or_else(rand::random);
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let id = format!("s{n}-{:08x}", rand::random::<u32>());
        let session = Session {
            id: id.clone(),
            current: solved.product.initial(),
            solved,
            seed,
            history: Vec::new(),
            interruptible: self.config.interruptible,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        self.sessions
            .write()
            .expect("session table")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ExecError> {
        self.sessions
            .read()
            .expect("session table")
            .get(id)
            .cloned()
            .ok_or_else(|| ExecError::UnknownSession(id.to_string()))
    }

    /// Runs `f` with exclusive access to one session.
    pub fn with_session<R>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<R, ExecError>) -> Result<R, ExecError> {
        let handle = self.session(id)?;
        let mut guard = handle.lock().expect("session lock");
        f(&mut guard)
    }

    pub fn state_view(&self, id: &str) -> Result<StateView, ExecError> {
        self.with_session(id, |s| Ok(state_view(s)))
    }

    pub fn legal_moves(&self, id: &str) -> Result<Vec<MoveView>, ExecError> {
        self.with_session(id, |s| legal_moves(s))
    }

    pub fn apply_human_move(&self, id: &str, action: &str) -> Result<StepResult, ExecError> {
        self.with_session(id, |s| apply_human_move(s, action))
    }

    pub fn robot_step(&self, id: &str) -> Result<StepResult, ExecError> {
        self.with_session(id, |s| robot_step(s))
    }

    /// Rebuilds a session from its seed and the actions in its history.
    pub fn replay(&self, id: &str) -> Result<String, ExecError> {
        let (solved, seed, history) =
            self.with_session(id, |s| Ok((s.solved.clone(), s.seed, s.history.clone())))?;
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let new_id = format!("s{n}-{:08x}", rand::random::<u32>());
        let mut session = Session {
            id: new_id.clone(),
            current: solved.product.initial(),
            solved,
            seed,
            history: Vec::new(),
            interruptible: self.config.interruptible,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for entry in &history {
            match entry.actor {
                Player::Human => apply_human_move(&mut session, &entry.action)?,
                Player::Robot => robot_step(&mut session)?,
            };
        }
        self.sessions
            .write()
            .expect("session table")
            .insert(new_id.clone(), Arc::new(Mutex::new(session)));
        Ok(new_id)
    }
}

fn state_view(s: &Session) -> StateView {
    let solved = &s.solved;
    let pg = &solved.product;
    let cur = s.current;
    let controller = pg.player(cur);
    let v = &solved.values.values;
    let robot_actions = (controller == Player::Robot).then(|| {
        let chosen = solved.strategy.robot_choice[cur];
        pg.choices(cur)
            .iter()
            .enumerate()
            .map(|(i, c)| ActionValue {
                action: c.action.clone(),
                expected: c.expected(v),
                chosen: chosen == Some(i),
            })
            .collect()
    });
    let g = solved.game_state(cur);
    StateView {
        session_id: s.id.clone(),
        scenario: solved.scenario.name.clone(),
        formula: solved.formula.to_string(),
        objective: solved.objective,
        seed: s.seed,
        state: cur,
        controller,
        variables: solved
            .game
            .variables
            .iter()
            .cloned()
            .zip(solved.game.valuations[g].iter().copied())
            .collect(),
        scene: solved.scene(cur),
        labels: pg.labels[cur].iter().map(|p| p.to_string()).collect(),
        value: v[cur],
        target: pg.target[cur],
        terminal: solved.is_terminal(cur),
        history: s.history.clone(),
        robot_actions,
    }
}

/// The state human moves are taken from, or why there is none.
fn human_origin(s: &Session) -> Result<(usize, bool), ExecError> {
    let cur = s.current;
    if s.solved.product.player(cur) == Player::Human {
        return Ok((cur, false));
    }
    if s.interruptible {
        if let Some(i) = s.solved.interrupt_state(cur) {
            return Ok((i, true));
        }
    }
    Err(ExecError::NotYourTurn("robot"))
}

fn legal_moves(s: &Session) -> Result<Vec<MoveView>, ExecError> {
    if s.solved.is_terminal(s.current) {
        return Ok(Vec::new());
    }
    let (origin, _) = human_origin(s)?;
    let pg = &s.solved.product;
    Ok(pg
        .choices(origin)
        .iter()
        .map(|c| MoveView {
            action: c.action.clone(),
            expected: c.expected(&s.solved.values.values),
            outcomes: c.transitions.iter().map(|&(t, p)| s.solved.outcome(t, p)).collect(),
        })
        .collect())
}

fn apply_human_move(s: &mut Session, action: &str) -> Result<StepResult, ExecError> {
    if s.solved.is_terminal(s.current) {
        return Err(ExecError::Terminal);
    }
    let (origin, interrupted) = human_origin(s)?;
    let solved = s.solved.clone();
    let choice = solved
        .product
        .choices(origin)
        .iter()
        .find(|c| c.action == action)
        .ok_or_else(|| ExecError::IllegalMove(action.to_string()))?;
    let to = s.sample(&choice.transitions);
    let p = choice.transitions.iter().find(|t| t.0 == to).map_or(0.0, |t| t.1);
    Ok(advance(s, Player::Human, action.to_string(), to, p, interrupted))
}

fn robot_step(s: &mut Session) -> Result<StepResult, ExecError> {
    let cur = s.current;
    if s.solved.is_terminal(cur) {
        return Err(ExecError::Terminal);
    }
    if s.solved.product.player(cur) != Player::Robot {
        return Err(ExecError::NotYourTurn("human"));
    }
    let solved = s.solved.clone();
    let c = solved.strategy.robot_choice[cur].unwrap_or(0);
    let choice = &solved.product.choices(cur)[c];
    let to = s.sample(&choice.transitions);
    let p = choice.transitions.iter().find(|t| t.0 == to).map_or(0.0, |t| t.1);
    Ok(advance(s, Player::Robot, choice.action.clone(), to, p, false))
}

fn advance(s: &mut Session, actor: Player, action: String, to: usize, p: f64, interrupted: bool) -> StepResult {
    s.history.push(HistoryEntry {
        actor,
        action: action.clone(),
        from: s.current,
        to,
        interrupted,
    });
    s.current = to;
    StepResult {
        actor,
        action,
        outcome: s.solved.outcome(to, p),
        view: state_view(s),
    }
}
