use serde::Serialize;
use sha2::{Digest, Sha256};

use super::scenario::Scenario;
use super::trace::{consensus_time, SimTrace};

/// SHA-256 of the scenario's canonical JSON form.
pub fn scenario_digest(scenario: &Scenario) -> String {
    let canonical = serde_json::to_vec(scenario).expect("scenario serializes");
    Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub digest: String,
    pub n_agents: usize,
    pub horizon: usize,
    pub step: f64,
    pub steps_completed: usize,
    pub consensus_epsilon: f64,
    /// First time from which both `max |δ_i − δ_j|` and `max |δ̇_i|` stay
    /// within the threshold until the end of the run.
    pub consensus_definition: &'static str,
    pub consensus_time: Option<f64>,
    pub final_max_gap: f64,
    pub min_separation: f64,
    pub active_constraint_total: usize,
    pub error: Option<String>,
}

impl RunSummary {
    pub fn new(scenario: &Scenario, trace: &SimTrace, error: Option<String>) -> Self {
        Self {
            scenario: scenario.name.clone(),
            digest: scenario_digest(scenario),
            n_agents: scenario.n_agents,
            horizon: scenario.mpc.horizon,
            step: scenario.mpc.step,
            steps_completed: trace.steps_recorded(),
            consensus_epsilon: scenario.consensus_epsilon,
            consensus_definition:
                "first t_k after which max gap <= eps and max |rate deviation| <= eps hold at every later step",
            consensus_time: consensus_time(&trace.metrics, scenario.consensus_epsilon),
            final_max_gap: trace.metrics.last().map_or(f64::NAN, |m| m.max_gap),
            min_separation: trace.min_separation(),
            active_constraint_total: trace.total_active_constraints(),
            error,
        }
    }
}

/// Wall-clock solve statistics, kept apart from the reproducible outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingSummary {
    pub solves: usize,
    pub max_solve_seconds: f64,
    pub mean_solve_seconds: f64,
}

impl TimingSummary {
    pub fn new(trace: &SimTrace) -> Self {
        Self {
            solves: trace.solve_times.len(),
            max_solve_seconds: trace.max_solve_time(),
            mean_solve_seconds: trace.mean_solve_time(),
        }
    }
}
