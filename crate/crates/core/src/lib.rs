//! Strategy synthesis for human-robot manipulation as turn-based stochastic games.
//!
//! A pick-and-place world ([`domain`]) is lifted to a two-player game under a
//! turn model ([`game`]), composed with the automaton of an LTLf task
//! ([`ltlf`], [`product`]) and solved for the robot's probability of
//! completing the task ([`solver`]). Games can be written to and read from
//! explicit text files ([`explicit`]); [`scenarios`] holds the case studies
//! and [`exec`] runs strategies against a live human.
//!
//! Numeric types are generic over [`scalar::Scalar`]; the aliases below fix
//! them to `f64`.

pub mod domain;
pub mod exec;
pub mod explicit;
pub mod game;
pub mod ltlf;
pub mod model;
pub mod pipeline;
pub mod product;
pub mod random;
pub mod scalar;
pub mod scenarios;
pub mod solver;

pub use ltlf::{parse, Dfa, Formula, Label, Proposition, Trace};
pub use model::Player;
pub use scalar::Scalar;
pub use solver::{Objective, SolverOptions, Strategy};

pub type Choice = model::Choice<f64>;
pub type GameGraph = model::GameGraph<f64>;
pub type Mdp = domain::Mdp<f64>;
pub type StochasticGame = game::StochasticGame<f64>;
pub type WorldGame = game::WorldGame<f64>;
pub type ProductGame = product::ProductGame<f64>;
pub type ValueVector = solver::ValueVector<f64>;
pub type Synthesis = solver::Synthesis<f64>;
