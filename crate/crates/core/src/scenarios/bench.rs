//! Benchmark matrix over generated pick-and-place worlds.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::DEFAULT_STATE_CAPACITY;
use crate::game::{build_game, GameError, TurnModel};
use crate::pipeline::{build_task_product, PipelineError};
use crate::product::ProductError;
use crate::solver::{synthesize, SolverOptions};

use super::pickplace::gen_pickplace;
use super::ScenarioError;

pub const CSV_HEADER: &str = "scenario,objects,locations,turn_model,states,transitions,build_s,solve_s,value,status";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchCell {
    pub objects: usize,
    pub locations: usize,
    pub turn_model: TurnModel,
}

/// One benchmark row. Counts refer to the product with the task automaton.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchResult {
    pub scenario: String,
    pub objects: usize,
    pub locations: usize,
    pub turn_model: TurnModel,
    pub states: Option<usize>,
    pub transitions: Option<usize>,
    pub game_states: Option<usize>,
    pub build_s: Option<f64>,
    pub solve_s: Option<f64>,
    pub value: Option<f64>,
    /// `ok`, `invalid_parameters`, `capacity_exceeded` or `solver_failed`.
    pub status: String,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub solver: SolverOptions,
    pub state_capacity: usize,
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            solver: SolverOptions::default(),
            state_capacity: DEFAULT_STATE_CAPACITY,
            parallel: true,
        }
    }
}

/// Every combination of the given parameters.
pub fn bench_matrix(objects: &[usize], locations: &[usize], turn_models: &[TurnModel]) -> Vec<BenchCell> {
    let mut cells = Vec::new();
    for &o in objects {
        for &l in locations {
            for &tm in turn_models {
                cells.push(BenchCell {
                    objects: o,
                    locations: l,
                    turn_model: tm,
                });
            }
        }
    }
    cells
}

fn run_cell(cell: &BenchCell, opts: &BenchOptions) -> BenchResult {
    let mut row = BenchResult {
        scenario: "pickplace".into(),
        objects: cell.objects,
        locations: cell.locations,
        turn_model: cell.turn_model,
        states: None,
        transitions: None,
        game_states: None,
        build_s: None,
        solve_s: None,
        value: None,
        status: "ok".into(),
    };
    let started = Instant::now();
    let scenario = match gen_pickplace(cell.objects, cell.locations, cell.turn_model) {
        Ok(s) => s,
        Err(_) => {
            row.status = "invalid_parameters".into();
            return row;
        }
    };
    let built = build_game::<f64>(&scenario.world, &scenario.init, cell.turn_model, opts.state_capacity)
        .map_err(|e| match e {
            GameError::Capacity(_) => "capacity_exceeded",
            _ => "invalid_parameters",
        })
        .and_then(|wg| {
            row.game_states = Some(wg.game.num_states());
            build_task_product(&wg.game, &scenario.formula).map_err(|e| match e {
                PipelineError::Product(ProductError::Capacity(_)) => "capacity_exceeded",
                _ => "invalid_parameters",
            })
        });
    let (_, product) = match built {
        Ok(b) => b,
        Err(status) => {
            row.status = status.into();
            return row;
        }
    };
    row.build_s = Some(started.elapsed().as_secs_f64());
    row.states = Some(product.num_states());
    row.transitions = Some(product.num_transitions());
    let solving = Instant::now();
    match synthesize(&product, &opts.solver) {
        Ok(s) => {
            row.solve_s = Some(solving.elapsed().as_secs_f64());
            row.value = Some(s.values.values[product.initial()]);
        }
        Err(_) => row.status = "solver_failed".into(),
    }
    row
}

/// Runs every cell, optionally in parallel, and returns rows sorted by
/// (objects, locations, turn model).
pub fn run_bench(cells: &[BenchCell], opts: &BenchOptions) -> Result<Vec<BenchResult>, ScenarioError> {
    if cells.is_empty() {
        return Err(ScenarioError::Param("benchmark matrix is empty".into()));
    }
    let mut rows: Vec<BenchResult> = if opts.parallel {
        cells.par_iter().map(|c| run_cell(c, opts)).collect()
    } else {
        cells.iter().map(|c| run_cell(c, opts)).collect()
    };
    rows.sort_by(|a, b| {
        (a.objects, a.locations, a.turn_model.to_string()).cmp(&(b.objects, b.locations, b.turn_model.to_string()))
    });
    Ok(rows)
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV with [`CSV_HEADER`]; missing measurements are empty fields.
pub fn bench_csv(rows: &[BenchResult]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.objects,
            r.locations,
            r.turn_model,
            opt(r.states),
            opt(r.transitions),
            opt(r.build_s.map(|t| format!("{t:.6}"))),
            opt(r.solve_s.map(|t| format!("{t:.6}"))),
            opt(r.value),
            r.status
        );
    }
    out
}
