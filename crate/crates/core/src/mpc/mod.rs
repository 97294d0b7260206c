//! Deviation-state bookkeeping, the local cost functions and the
//! path-following correction.

mod config;
mod cost;
mod state;

pub use config::{AlphaParams, ConfigError, CostVariant, MpcConfig, SolverOptions, Weights};
pub use cost::{
    alpha_correction, cost_consensus, cost_ordered, cost_race, in_window, total_cost, tracking_terms, CorridorWindow,
    TrackingTerm,
};
pub use state::{shift_initialize, AgentState, NeighborBundle, NeighborPlan};
