//! Scenario files: a world (or a built-in game) plus a default task.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::domain::{Arrangement, WorldConfig, WorldSpec};
use crate::game::{build_game, StochasticGame, TurnModel};
use crate::ltlf::{parse, Formula};
use crate::scalar::Scalar;
use crate::solver::Objective;

use super::tictactoe::{gen_tictactoe, Cell};
use super::ScenarioError;

/// What a scenario builds.
#[derive(Clone, Debug)]
pub enum ScenarioSpec {
    PickPlace {
        config: WorldConfig,
        world: WorldSpec,
        init: Arrangement,
        turn_model: TurnModel,
    },
    TicTacToe {
        sigma: f64,
    },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub formula: Formula,
    pub objective: Objective,
    pub spec: ScenarioSpec,
    /// Hash of the source text, used to key cached strategies.
    pub content_hash: u64,
}

/// Short listing used by the service.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub kind: &'static str,
    pub description: String,
    pub formula: String,
    pub objective: Objective,
}

fn take_string(map: &mut Map<String, Value>, key: &str) -> Result<Option<String>, ScenarioError> {
    match map.remove(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(ScenarioError::Format(format!("'{key}' must be a string"))),
    }
}

impl Scenario {
    /// Parses a scenario document. Besides the world fields it accepts
    /// `name`, `description`, `kind` (`pickplace` or `tictactoe`), `formula`,
    /// `objective`, `turn_model` and, for tic-tac-toe, `sigma`.
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let mut map: Map<String, Value> = serde_json::from_str(text)?;
        let name = take_string(&mut map, "name")?.ok_or_else(|| ScenarioError::Format("missing 'name'".into()))?;
        let description = take_string(&mut map, "description")?.unwrap_or_default();
        let kind = take_string(&mut map, "kind")?.unwrap_or_else(|| "pickplace".into());
        let formula_text =
            take_string(&mut map, "formula")?.ok_or_else(|| ScenarioError::Format("missing 'formula'".into()))?;
        let formula = parse(&formula_text)?;
        let objective: Objective = match map.remove("objective") {
            None => Objective::Maximize,
            Some(v) => serde_json::from_value(v)?,
        };
        let spec = match kind.as_str() {
            "pickplace" => {
                let turn_model: TurnModel = match map.remove("turn_model") {
                    None => return Err(ScenarioError::Format("missing 'turn_model'".into())),
                    Some(v) => serde_json::from_value(v)?,
                };
                let config: WorldConfig = serde_json::from_value(Value::Object(map))?;
                let (world, init) = WorldSpec::from_config(&config)?;
                ScenarioSpec::PickPlace {
                    config,
                    world,
                    init,
                    turn_model,
                }
            }
            "tictactoe" => {
                let sigma = match map.remove("sigma") {
                    None => 1.0,
                    Some(v) => v
                        .as_f64()
                        .ok_or_else(|| ScenarioError::Format("'sigma' must be a number".into()))?,
                };
                if let Some(key) = map.keys().next() {
                    return Err(ScenarioError::Format(format!("unknown key '{key}'")));
                }
                ScenarioSpec::TicTacToe { sigma }
            }
            other => return Err(ScenarioError::Format(format!("unknown scenario kind '{other}'"))),
        };
        let mut hasher = DefaultHasher::new();
        text.hash(&mut hasher);
        Ok(Scenario {
            name,
            description,
            formula,
            objective,
            spec,
            content_hash: hasher.finish(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::from_json(&text).map_err(|e| ScenarioError::File {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    }

    /// Loads every `*.json` file in `dir`, sorted by scenario name.
    pub fn load_dir(dir: &Path) -> Result<Vec<Scenario>, ScenarioError> {
        let entries = fs::read_dir(dir).map_err(|source| ScenarioError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|source| ScenarioError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "json") {
                paths.push(path);
            }
        }
        paths.sort();
        let mut scenarios = paths.iter().map(|p| Scenario::from_file(p)).collect::<Result<Vec<_>, _>>()?;
        scenarios.sort_by(|a, b| a.name.cmp(&b.name));
        if let Some(w) = scenarios.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(ScenarioError::Format(format!("duplicate scenario name '{}'", w[0].name)));
        }
        Ok(scenarios)
    }

    pub fn kind(&self) -> &'static str {
        match self.spec {
            ScenarioSpec::PickPlace { .. } => "pickplace",
            ScenarioSpec::TicTacToe { .. } => "tictactoe",
        }
    }

    pub fn summary(&self) -> ScenarioSummary {
        ScenarioSummary {
            name: self.name.clone(),
            kind: self.kind(),
            description: self.description.clone(),
            formula: self.formula.to_string(),
            objective: self.objective,
        }
    }

    pub fn build_game<T: Scalar>(&self, capacity: usize) -> Result<StochasticGame<T>, ScenarioError> {
        Ok(match &self.spec {
            ScenarioSpec::PickPlace {
                world, init, turn_model, ..
            } => build_game(world, init, *turn_model, capacity)?.game,
            ScenarioSpec::TicTacToe { sigma } => gen_tictactoe(*sigma)?.game,
        })
    }

    /// Scene description of a game state valuation, for display.
    pub fn render(&self, valuation: &[i64]) -> Value {
        match &self.spec {
            ScenarioSpec::PickPlace { world, .. } => {
                let placement: Map<String, Value> = world
                    .objects
                    .iter()
                    .zip(valuation)
                    .map(|(o, &l)| (o.clone(), Value::String(world.locations[l as usize].clone())))
                    .collect();
                serde_json::json!({
                    "kind": "pickplace",
                    "locations": world.locations,
                    "placement": placement,
                })
            }
            ScenarioSpec::TicTacToe { .. } => {
                let board: Vec<Cell> = valuation[..9].iter().map(|&c| Cell::from_code(c).unwrap_or(Cell::Empty)).collect();
                serde_json::json!({ "kind": "tictactoe", "board": board })
            }
        }
    }
}
