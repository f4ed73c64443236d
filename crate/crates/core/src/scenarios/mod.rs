//! Case-study generators, scenario files and the benchmark harness.

mod bench;
mod file;
mod pickplace;
mod tictactoe;

use std::path::PathBuf;

use thiserror::Error;

use crate::domain::DomainError;
use crate::game::GameError;
use crate::ltlf::LtlfError;

pub use bench::{bench_csv, bench_matrix, run_bench, BenchCell, BenchOptions, BenchResult, CSV_HEADER};
pub use file::{Scenario, ScenarioSpec, ScenarioSummary};
pub use pickplace::{gen_pickplace, goal_proposition, pickplace_config, PickPlace, GENERATED_ROBOT_SUCCESS};
pub use tictactoe::{
    cell_action, gen_tictactoe, human_win_formula, robot_win_formula, tremble_distribution, Cell, TicTacToe,
    TttState, DRAW, HUMAN_WIN, ROBOT_WIN,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("malformed scenario: {0}")]
    Format(String),
    #[error("malformed scenario json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<ScenarioError>,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Ltlf(#[from] LtlfError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_STATE_CAPACITY;
    use crate::game::{build_game, TurnModel};
    use crate::pipeline::synthesize_task;
    use crate::solver::SolverOptions;

    #[test]
    fn pickplace_parameters() {
        assert!(matches!(gen_pickplace(3, 5, TurnModel::ratio(1, 1)), Err(ScenarioError::Param(_))));
        assert!(matches!(gen_pickplace(0, 5, TurnModel::ratio(1, 1)), Err(ScenarioError::Param(_))));
        let p = gen_pickplace(2, 6, TurnModel::ratio(1, 1)).unwrap();
        assert_eq!(p.world.locations, ["robot_gripper", "human_gripper", "else", "L1", "L2", "L3"]);
        assert_eq!(p.formula.to_string(), "(F p_o1_L1 & F p_o2_L2)");
    }

    #[test]
    fn single_object_values() {
        let solve = |tm| {
            let p = gen_pickplace(1, 4, tm).unwrap();
            let wg = build_game::<f64>(&p.world, &p.init, tm, DEFAULT_STATE_CAPACITY).unwrap();
            synthesize_task(&wg.game, &p.formula, &SolverOptions::default()).unwrap().initial_value()
        };
        let ratio = solve(TurnModel::ratio(1, 1));
        assert!((ratio - 0.9).abs() < 1e-6, "{ratio}");
        let pt = solve(TurnModel::ProbTermination(0.05));
        assert!((pt - 1.0).abs() < 1e-4, "{pt}");
    }

    #[test]
    fn scenario_file_parsing() {
        let text = r#"{
            "name": "demo", "formula": "F at_goal", "turn_model": {"ratio": [1, 1]},
            "objects": ["box"], "locations": ["robot_gripper", "human_gripper", "else", "goal"],
            "init": {"box": "else"},
            "propositions": [{"name": "at_goal", "object": "box", "location": "goal"}]
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.kind(), "pickplace");
        let g = s.build_game::<f64>(DEFAULT_STATE_CAPACITY).unwrap();
        assert!(g.num_states() > 0);
        let bad = text.replace("\"init\"", "\"colour\": 1, \"init\"");
        assert!(Scenario::from_json(&bad).is_err());
        let ttt = Scenario::from_json(r#"{"name": "t", "kind": "tictactoe", "sigma": 0, "formula": "F RobotWin"}"#).unwrap();
        assert_eq!(ttt.kind(), "tictactoe");
        assert!(Scenario::from_json(r#"{"name": "t", "kind": "tictactoe", "formula": "F RobotWin", "x": 1}"#).is_err());
        assert!(Scenario::from_json(r#"{"name": "t", "kind": "tictactoe", "formula": "U p"}"#).is_err());
    }

    #[test]
    fn bench_rows_and_csv() {
        let cells = bench_matrix(&[1, 3], &[5], &[TurnModel::ratio(1, 1)]);
        let rows = run_bench(&cells, &BenchOptions::default()).unwrap();
        assert_eq!(rows[0].status, "ok");
        assert_eq!(rows[1].status, "invalid_parameters");
        let csv = bench_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().ends_with(",,,,,,invalid_parameters"));
    }
}
