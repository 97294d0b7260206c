use std::time::Instant;

use nalgebra::Vector3;

use super::disturbance::DisturbanceModel;
use super::scenario::Scenario;
use super::trace::{SimTrace, TraceRow};
use super::SimError;
use crate::mission::{min_pairwise_separation, DesiredTrajectory};
use crate::mpc::{shift_initialize, total_cost, AgentState, NeighborBundle, NeighborPlan};
use crate::solver::solve_local;

/// Aborted run: the rounds completed before the failure and its cause.
#[derive(Debug)]
pub struct SimFailure {
    pub trace: SimTrace,
    pub error: SimError,
}

/// Runs the synchronous distributed scheme over the whole mission.
///
/// Round `k` measures each agent's position at its predicted virtual time,
/// shifts the previous plan by the correction, and solves the local problem
/// against the neighbors' plans broadcast in round `k − 1`.
pub fn run(scenario: &Scenario) -> Result<SimTrace, Box<SimFailure>> {
    let fail = |trace: SimTrace, error: SimError| Box::new(SimFailure { trace, error });
    let setup = || -> Result<_, SimError> {
        Ok((
            scenario.topology()?,
            scenario.mpc_config()?,
            scenario.desired_trajectories()?,
        ))
    };
    let (topology, cfg, paths) = setup().map_err(|e| fail(SimTrace::default(), e))?;
    let n = scenario.n_agents;
    let h = cfg.step;
    let mut trace = SimTrace::new(n, h);

    let gamma0 = scenario.initial_gamma();
    let rate0 = scenario.initial_rate();
    let mut states: Vec<AgentState<f64>> = (0..n)
        .map(|i| AgentState::bootstrap(gamma0[i], rate0[i], cfg.horizon, h))
        .collect();
    let (lo, hi) = (cfg.rate_min(), cfg.rate_max());
    if let Some(i) = (0..n).find(|&i| !(lo..=hi).contains(&states[i].rate[0])) {
        let error = SimError::InfeasibleInit {
            agent: i,
            rate: states[i].rate[0],
            min: lo,
            max: hi,
        };
        return Err(fail(trace, error));
    }

    let full = topology.neighbors();
    let bootstrap_rows = (0..n)
        .map(|i| {
            let bundle = bundle_for(&full[i], &states);
            let cost = total_cost(&states[i], i, &bundle, &cfg, 0.0);
            let reference = paths[i].eval(states[i].delta[0]).position;
            row(
                0,
                0.0,
                i,
                &states[i],
                0.0,
                &reference,
                &reference,
                &paths[i],
                &full[i],
                (0, 0, 0),
                cost,
            )
        })
        .collect();
    trace.push_round(bootstrap_rows, separation(&paths, &states, 0.0));

    let mut disturbance = DisturbanceModel::new(&scenario.disturbance, n, scenario.seed, h);
    for k in 1..=scenario.steps() {
        let t_k = k as f64 * h;
        let links = topology.realize_links(scenario.link_drop_probability, scenario.seed, k);
        let references: Vec<_> = (0..n).map(|i| paths[i].eval(states[i].delta[1] + t_k)).collect();
        let measured = disturbance.measure(k, &references, &cfg.alpha);
        let mut next = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let (d0, r0) = shift_initialize(&states[i], measured[i].alpha);
            let bundle = bundle_for(&links[i], &states);
            let warm = states[i].shifted_controls();
            let clock = Instant::now();
            let solved = solve_local(&cfg, i, d0, r0, &bundle, t_k, &warm, k);
            trace.solve_times.push(clock.elapsed().as_secs_f64());
            let sol = match solved {
                Ok(s) => s,
                Err(source) => {
                    let error = SimError::Solver {
                        step: k,
                        agent: i,
                        source,
                    };
                    return Err(fail(trace, error));
                }
            };
            let stats = (sol.qp.iterations, sol.qp.active.len(), sol.pattern_iterations);
            rows.push(row(
                k,
                t_k,
                i,
                &sol.state,
                measured[i].alpha,
                &references[i].position,
                &measured[i].actual,
                &paths[i],
                &links[i],
                stats,
                sol.cost,
            ));
            next.push(sol.state);
        }
        let min_sep = separation(&paths, &next, t_k);
        trace.push_round(rows, min_sep);
        states = next;
    }
    Ok(trace)
}

fn bundle_for(neighbors: &[usize], states: &[AgentState<f64>]) -> NeighborBundle<f64> {
    NeighborBundle::new(
        neighbors
            .iter()
            .map(|&j| NeighborPlan {
                index: j,
                delta: states[j].delta.clone(),
            })
            .collect(),
    )
}

fn separation(paths: &[DesiredTrajectory<f64>], states: &[AgentState<f64>], t_k: f64) -> f64 {
    let pts: Vec<Vector3<f64>> = paths
        .iter()
        .zip(states)
        .map(|(p, s)| p.eval(s.delta[0] + t_k).position)
        .collect();
    min_pairwise_separation(&pts)
}

#[allow(clippy::too_many_arguments)]
fn row(
    step: u64,
    t: f64,
    agent: usize,
    state: &AgentState<f64>,
    alpha: f64,
    reference: &Vector3<f64>,
    actual: &Vector3<f64>,
    path: &DesiredTrajectory<f64>,
    neighbors: &[usize],
    (qp_iterations, active_constraints, pattern_iterations): (usize, usize, usize),
    cost: f64,
) -> TraceRow {
    let gamma = state.delta[0] + t;
    let desired = path.eval(gamma).position;
    TraceRow {
        step,
        t,
        agent,
        delta0: state.delta[0],
        rate0: state.rate[0],
        control0: state.control.first().copied().unwrap_or(0.0),
        alpha,
        gamma,
        desired_x: desired.x,
        desired_y: desired.y,
        desired_z: desired.z,
        delta1: state.delta[1],
        rate1: state.rate[1],
        ref_x: reference.x,
        ref_y: reference.y,
        ref_z: reference.z,
        actual_x: actual.x,
        actual_y: actual.y,
        actual_z: actual.z,
        neighbors: neighbors.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";"),
        qp_iterations,
        active_constraints,
        pattern_iterations,
        cost,
        max_gap: 0.0,
        max_rate: 0.0,
        min_separation: 0.0,
    }
}
