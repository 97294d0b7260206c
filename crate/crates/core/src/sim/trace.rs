//! Recorded simulation history and the metrics computed from it.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::SimError;
use crate::analysis::max_pairwise_gap;

/// One agent at one sampling instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: u64,
    pub t: f64,
    pub agent: usize,
    /// `δ_{i,0}^k`, after the path-following correction.
    pub delta0: f64,
    pub rate0: f64,
    /// First optimal control `u_{i,0}^k`, the applied input.
    pub control0: f64,
    pub alpha: f64,
    /// `γ_i(t_k) = δ_{i,0}^k + t_k`.
    pub gamma: f64,
    /// Desired position `x_d(γ_i(t_k))`.
    pub desired_x: f64,
    pub desired_y: f64,
    pub desired_z: f64,
    pub delta1: f64,
    pub rate1: f64,
    /// Reference point used to measure the correction.
    pub ref_x: f64,
    pub ref_y: f64,
    pub ref_z: f64,
    pub actual_x: f64,
    pub actual_y: f64,
    pub actual_z: f64,
    /// Neighbors heard from this round, `;`-separated.
    pub neighbors: String,
    pub qp_iterations: usize,
    pub active_constraints: usize,
    pub pattern_iterations: usize,
    pub cost: f64,
    /// Step-global: `max_{i,j} |δ_{i,0} − δ_{j,0}|`.
    pub max_gap: f64,
    /// Step-global: `max_i |δ̇_{i,0}|`.
    pub max_rate: f64,
    /// Step-global: smallest distance between the desired positions `x_d(γ_i)`.
    pub min_separation: f64,
}

/// Team-wide quantities at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMetrics {
    pub step: u64,
    pub t: f64,
    pub max_gap: f64,
    pub max_rate: f64,
    pub min_separation: f64,
}

/// Append-only simulation record: `n_agents` rows per step, `k = 0` being
/// the zero-input bootstrap.
#[derive(Debug, Clone, Default)]
pub struct SimTrace {
    pub n_agents: usize,
    pub step: f64,
    pub rows: Vec<TraceRow>,
    pub metrics: Vec<StepMetrics>,
    /// Wall-clock seconds of every local solve, in row order from `k = 1`.
    pub solve_times: Vec<f64>,
}

impl SimTrace {
    pub fn new(n_agents: usize, step: f64) -> Self {
        Self {
            n_agents,
            step,
            ..Self::default()
        }
    }

    /// Appends one complete round and its team metrics.
    pub fn push_round(&mut self, mut rows: Vec<TraceRow>, min_separation: f64) {
        let deltas: Vec<f64> = rows.iter().map(|r| r.delta0).collect();
        let max_gap = max_pairwise_gap(&deltas);
        let max_rate = rows.iter().fold(0.0f64, |m, r| m.max(r.rate0.abs()));
        let (step, t) = (rows[0].step, rows[0].t);
        for r in &mut rows {
            r.max_gap = max_gap;
            r.max_rate = max_rate;
            r.min_separation = min_separation;
        }
        self.rows.extend(rows);
        self.metrics.push(StepMetrics {
            step,
            t,
            max_gap,
            max_rate,
            min_separation,
        });
    }

    pub fn steps_recorded(&self) -> usize {
        self.metrics.len()
    }

    /// Rows of step `k`.
    pub fn round(&self, k: usize) -> &[TraceRow] {
        &self.rows[k * self.n_agents..(k + 1) * self.n_agents]
    }

    /// Column of one agent over all steps.
    pub fn agent_series(&self, agent: usize, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.agent == agent).map(f).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SimError> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Solve times live in their own file so the main trace stays reproducible.
    pub fn write_timing_csv(&self, path: &Path) -> Result<(), SimError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "step,agent,solve_seconds")?;
        let solved = self.rows.iter().skip(self.n_agents);
        for (r, s) in solved.zip(&self.solve_times) {
            writeln!(f, "{},{},{:e}", r.step, r.agent, s)?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn max_solve_time(&self) -> f64 {
        self.solve_times.iter().fold(0.0, |m, &s| m.max(s))
    }

    pub fn mean_solve_time(&self) -> f64 {
        if self.solve_times.is_empty() {
            0.0
        } else {
            self.solve_times.iter().sum::<f64>() / self.solve_times.len() as f64
        }
    }

    pub fn min_separation(&self) -> f64 {
        self.metrics.iter().fold(f64::INFINITY, |m, s| m.min(s.min_separation))
    }

    pub fn total_active_constraints(&self) -> usize {
        self.rows.iter().map(|r| r.active_constraints).sum()
    }
}

/// First `t_k` from which the gap and rate stay within `epsilon` for every
/// later recorded step.
pub fn consensus_time(metrics: &[StepMetrics], epsilon: f64) -> Option<f64> {
    let mut entry = None;
    for m in metrics {
        if m.max_gap <= epsilon && m.max_rate <= epsilon {
            entry.get_or_insert(m.t);
        } else {
            entry = None;
        }
    }
    entry
}

/// Passage and safety summary of a corridor scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorridorMetrics {
    /// Agents sorted by the time their `γ` first reaches the corridor entry.
    pub passage_order: Vec<usize>,
    pub min_distance: f64,
    /// Smallest distance over pairs with at least one member inside the corridor.
    pub min_distance_in_corridor: f64,
    /// Separate episodes of some pair being closer than `separation`.
    pub collisions: usize,
    pub collision: bool,
    /// Consensus time measured from the step all agents have left the
    /// ordering window.
    pub post_window_consensus_time: Option<f64>,
}

/// Passage order, distances between desired positions, and post-window
/// consensus of a trace.
pub fn corridor_metrics(
    trace: &SimTrace,
    entry: f64,
    exit: f64,
    window_end: f64,
    separation: f64,
    epsilon: f64,
) -> CorridorMetrics {
    let n = trace.n_agents;
    let steps = trace.steps_recorded();
    let mut first_entry: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let t = trace
                .agent_series(i, |r| if r.gamma >= entry { r.t } else { f64::INFINITY })
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            (t, i)
        })
        .collect();
    first_entry.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut min_distance = f64::INFINITY;
    let mut min_in = f64::INFINITY;
    let mut collisions = 0;
    let mut close = vec![false; n * n];
    for k in 0..steps {
        let round = trace.round(k);
        for i in 0..n {
            for j in i + 1..n {
                let (p, q) = (&round[i], &round[j]);
                let d = ((p.desired_x - q.desired_x).powi(2)
                    + (p.desired_y - q.desired_y).powi(2)
                    + (p.desired_z - q.desired_z).powi(2))
                .sqrt();
                min_distance = min_distance.min(d);
                let inside = |g: f64| (entry..=exit).contains(&g);
                if inside(round[i].gamma) || inside(round[j].gamma) {
                    min_in = min_in.min(d);
                }
                let now = d < separation;
                if now && !close[i * n + j] {
                    collisions += 1;
                }
                close[i * n + j] = now;
            }
        }
    }
    let left = (0..steps).find(|&k| trace.round(k).iter().all(|r| r.gamma > window_end));
    let post_window_consensus_time = left.and_then(|k| consensus_time(&trace.metrics[k..], epsilon));
    CorridorMetrics {
        passage_order: first_entry.into_iter().map(|(_, i)| i).collect(),
        min_distance,
        min_distance_in_corridor: min_in,
        collisions,
        collision: min_distance < separation,
        post_window_consensus_time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(gaps: &[f64]) -> Vec<StepMetrics> {
        gaps.iter()
            .enumerate()
            .map(|(k, &g)| StepMetrics {
                step: k as u64,
                t: k as f64 * 0.5,
                max_gap: g,
                max_rate: 0.0,
                min_separation: f64::INFINITY,
            })
            .collect()
    }

    #[test]
    fn consensus_time_requires_holding_thereafter() {
        assert_eq!(consensus_time(&metrics(&[0.0, 0.0, 0.0]), 0.01), Some(0.0));
        assert_eq!(
            consensus_time(&metrics(&[1.0, 0.001, 0.5, 0.002, 0.0]), 0.01),
            Some(1.5)
        );
        assert_eq!(consensus_time(&metrics(&[1.0, 0.5, 0.2]), 0.01), None);
    }

    #[test]
    fn consensus_time_of_geometric_decay() {
        let (g0, r, eps) = (2.0f64, 0.9f64, 0.01);
        let gaps: Vec<f64> = (0..200).map(|k| g0 * r.powi(k)).collect();
        let scanned = consensus_time(&metrics(&gaps), eps).unwrap();
        let k = ((eps / g0).ln() / r.ln()).ceil();
        assert_eq!(scanned, k * 0.5);
    }
}
