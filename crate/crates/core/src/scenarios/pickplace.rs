//! Parameterised pick-and-place benchmark worlds.

use crate::domain::{ActionSuccess, PropositionDef, WorldConfig, WorldSpec, ELSE, HUMAN_GRIPPER, ROBOT_GRIPPER};
use crate::domain::Arrangement;
use crate::game::TurnModel;
use crate::ltlf::Formula;

use super::ScenarioError;

/// Success rate of every generated robot grasp and place.
pub const GENERATED_ROBOT_SUCCESS: f64 = 0.9;

#[derive(Clone, Debug)]
pub struct PickPlace {
    pub world: WorldSpec,
    pub init: Arrangement,
    pub formula: Formula,
    pub turn_model: TurnModel,
}

pub fn goal_proposition(object: usize, location: usize) -> String {
    format!("p_o{object}_L{location}")
}

/// World configuration with objects `o1..` in `else`, locations
/// `robot_gripper, human_gripper, else, L1..L{n-3}` and one goal proposition
/// per object.
pub fn pickplace_config(num_objects: usize, num_locations: usize) -> Result<WorldConfig, ScenarioError> {
    if num_objects == 0 {
        return Err(ScenarioError::Param("at least one object is required".into()));
    }
    if num_locations < num_objects + 3 {
        return Err(ScenarioError::Param(format!(
            "{num_objects} objects need at least {} locations, got {num_locations}",
            num_objects + 3
        )));
    }
    let objects: Vec<String> = (1..=num_objects).map(|i| format!("o{i}")).collect();
    let mut locations = vec![ROBOT_GRIPPER.to_string(), HUMAN_GRIPPER.to_string(), ELSE.to_string()];
    locations.extend((1..=num_locations - 3).map(|i| format!("L{i}")));
    Ok(WorldConfig {
        init: objects.iter().map(|o| (o.clone(), ELSE.to_string())).collect(),
        robot_success: objects
            .iter()
            .map(|o| {
                let rates = ActionSuccess {
                    grasp: GENERATED_ROBOT_SUCCESS,
                    place: GENERATED_ROBOT_SUCCESS,
                };
                (o.clone(), rates)
            })
            .collect(),
        propositions: (1..=num_objects)
            .map(|i| PropositionDef {
                name: goal_proposition(i, i),
                object: format!("o{i}"),
                location: format!("L{i}"),
            })
            .collect(),
        objects,
        locations,
        robot_may_place_else: true,
        ..Default::default()
    })
}

/// Benchmark world: every object must eventually reach its own location.
pub fn gen_pickplace(num_objects: usize, num_locations: usize, tm: TurnModel) -> Result<PickPlace, ScenarioError> {
    tm.validate()?;
    let config = pickplace_config(num_objects, num_locations)?;
    let (world, init) = WorldSpec::from_config(&config)?;
    let formula = Formula::conjunction((1..=num_objects).map(|i| Formula::eventually(Formula::atom(&goal_proposition(i, i)))));
    Ok(PickPlace {
        world,
        init,
        formula,
        turn_model: tm,
    })
}
