//! Cumulant asymptotics and phase classification for subgraph counts in the
//! Poisson random-connection model, with combinatorial oracles and a Monte
//! Carlo simulator.

pub mod asymptotics;
pub mod census;
pub mod diagrams;
pub mod graph6;
pub mod graph_model;
pub mod hull;
pub mod partitions;
pub mod rcm_sim;

/// Exact rational used for all exponents and slopes.
pub type Rational = num_rational::Ratio<i64>;

pub use graph_model::{BalanceReport, EndpointGraph, GraphError};
