//! Tic-tac-toe where every placement may tremble into a nearby cell.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::game::{StochasticGame, STAY};
use crate::ltlf::{Formula, Label, Proposition};
use crate::model::{Choice, GameGraph, Player};
use crate::scalar::Scalar;

use super::ScenarioError;

pub const ROBOT_WIN: &str = "RobotWin";
pub const HUMAN_WIN: &str = "HumanWin";
pub const DRAW: &str = "Draw";

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Empty,
    Robot,
    Human,
}

impl Cell {
    pub fn code(self) -> i64 {
        match self {
            Cell::Empty => 0,
            Cell::Robot => 1,
            Cell::Human => 2,
        }
    }

    pub fn from_code(code: i64) -> Option<Cell> {
        match code {
            0 => Some(Cell::Empty),
            1 => Some(Cell::Robot),
            2 => Some(Cell::Human),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TttState {
    pub board: [Cell; 9],
    pub turn: Player,
}

impl TttState {
    pub fn empty() -> Self {
        TttState {
            board: [Cell::Empty; 9],
            turn: Player::Robot,
        }
    }

    pub fn winner(&self) -> Option<Player> {
        for line in LINES {
            let [a, b, c] = line.map(|i| self.board[i]);
            if a != Cell::Empty && a == b && b == c {
                return Some(if a == Cell::Robot { Player::Robot } else { Player::Human });
            }
        }
        None
    }

    pub fn is_full(&self) -> bool {
        self.board.iter().all(|&c| c != Cell::Empty)
    }

    pub fn is_terminal(&self) -> bool {
        self.winner().is_some() || self.is_full()
    }

    pub fn empty_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..9).filter(|&i| self.board[i] == Cell::Empty)
    }

    fn mark(turn: Player) -> Cell {
        match turn {
            Player::Robot => Cell::Robot,
            Player::Human => Cell::Human,
        }
    }

    /// The board after the player to move lands a marker on `cell`.
    pub fn play(&self, cell: usize) -> TttState {
        let mut next = self.clone();
        next.board[cell] = Self::mark(self.turn);
        next.turn = self.turn.opponent();
        next
    }

    pub fn label(&self) -> Label {
        let name = match (self.winner(), self.is_full()) {
            (Some(Player::Robot), _) => ROBOT_WIN,
            (Some(Player::Human), _) => HUMAN_WIN,
            (None, true) => DRAW,
            (None, false) => return Label::empty(),
        };
        Label::of(&[name])
    }
}

fn center(cell: usize) -> (f64, f64) {
    ((cell / 3) as f64, (cell % 3) as f64)
}

fn dist2(a: usize, b: usize) -> f64 {
    let (ra, ca) = center(a);
    let (rb, cb) = center(b);
    (ra - rb).powi(2) + (ca - cb).powi(2)
}

/// Where a marker aimed at `intended` ends up: Gaussian weights
/// `exp(-d²/2σ²)` over all nine cells on a unit grid, each landing cell
/// mapped to its nearest unoccupied cell (lowest index on ties). Returns
/// `(cell, probability)` pairs in cell order.
pub fn tremble_distribution(board: &TttState, intended: usize, sigma: f64) -> Result<Vec<(usize, f64)>, ScenarioError> {
    if intended >= 9 || board.board[intended] != Cell::Empty {
        return Err(ScenarioError::Param(format!("cell {intended} is not free")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(ScenarioError::Param(format!("sigma {sigma} must be finite and non-negative")));
    }
    if sigma == 0.0 {
        return Ok(vec![(intended, 1.0)]);
    }
    let free: Vec<usize> = board.empty_cells().collect();
    let nearest_free = |cell: usize| -> usize {
        let mut best = free[0];
        for &f in &free[1..] {
            if dist2(cell, f) < dist2(cell, best) {
                best = f;
            }
        }
        best
    };
    let mut mass = [0.0f64; 9];
    for c in 0..9 {
        mass[nearest_free(c)] += (-dist2(intended, c) / (2.0 * sigma * sigma)).exp();
    }
    let total: f64 = mass.iter().sum();
    Ok((0..9).filter(|&c| mass[c] > 0.0).map(|c| (c, mass[c] / total)).collect())
}

/// Tic-tac-toe with the robot moving first.
#[derive(Clone, Debug)]
pub struct TicTacToe<T> {
    pub game: StochasticGame<T>,
    pub states: Vec<TttState>,
    pub sigma: f64,
}

pub fn robot_win_formula() -> Formula {
    Formula::eventually(Formula::atom(ROBOT_WIN))
}

pub fn human_win_formula() -> Formula {
    Formula::eventually(Formula::atom(HUMAN_WIN))
}

pub fn cell_action(cell: usize) -> String {
    format!("place_c{cell}")
}

/// Builds the reachable game. Placing aims at an empty cell and lands per
/// [`tremble_distribution`]; finished boards only offer `stay`.
pub fn gen_tictactoe<T: Scalar>(sigma: f64) -> Result<TicTacToe<T>, ScenarioError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(ScenarioError::Param(format!("sigma {sigma} must be finite and non-negative")));
    }
    let start = TttState::empty();
    let mut states = vec![start.clone()];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut choices: Vec<Vec<Choice<T>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(si) = queue.pop_front() {
        let s = states[si].clone();
        let mut here = Vec::new();
        if !s.is_terminal() {
            for cell in s.empty_cells() {
                let mut transitions = Vec::new();
                for (landing, p) in tremble_distribution(&s, cell, sigma)? {
                    let next = s.play(landing);
                    let ti = *index.entry(next.clone()).or_insert_with(|| {
                        states.push(next);
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    });
                    transitions.push((ti, T::lit(p)));
                }
                here.push(Choice::new(cell_action(cell), transitions));
            }
        }
        if here.is_empty() {
            here.push(Choice::self_loop(STAY, si));
        }
        if choices.len() <= si {
            choices.resize_with(si + 1, Vec::new);
        }
        choices[si] = here;
    }
    let propositions: BTreeSet<Proposition> = [ROBOT_WIN, HUMAN_WIN, DRAW]
        .iter()
        .map(|p| Proposition::new(*p).expect("valid name"))
        .collect();
    let mut variables: Vec<String> = (0..9).map(|i| format!("c{i}")).collect();
    variables.push("turn".into());
    let game = StochasticGame {
        graph: GameGraph {
            player: states.iter().map(|s| s.turn).collect(),
            choices,
            initial: 0,
        },
        variables,
        valuations: states
            .iter()
            .map(|s| {
                let mut v: Vec<i64> = s.board.iter().map(|c| c.code()).collect();
                v.push(s.turn.id() as i64);
                v
            })
            .collect(),
        labels: states.iter().map(TttState::label).collect(),
        propositions,
    };
    Ok(TicTacToe { game, states, sigma })
}
