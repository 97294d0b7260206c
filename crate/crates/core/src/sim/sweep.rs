use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::run::run;
use super::scenario::Scenario;
use super::trace::consensus_time;
use super::SimError;

/// Grid values; an empty axis keeps the base scenario's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepAxes {
    pub agents: Vec<usize>,
    pub horizons: Vec<usize>,
    pub steps: Vec<f64>,
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub n_agents: usize,
    pub horizon: usize,
    pub step: f64,
    pub consensus_time: Option<f64>,
    pub steps_completed: usize,
    pub max_solve_seconds: f64,
    pub mean_solve_seconds: f64,
    pub error: Option<String>,
}

/// Runs every grid point on a pool of `threads` workers. Cells are ordered
/// by agents, then horizon, then step. A failing cell is reported, not fatal.
pub fn sweep(base: &Scenario, axes: &SweepAxes, threads: usize) -> Vec<SweepCell> {
    let or_base = |v: &Vec<usize>, b: usize| if v.is_empty() { vec![b] } else { v.clone() };
    let agents = or_base(&axes.agents, base.n_agents);
    let horizons = or_base(&axes.horizons, base.mpc.horizon);
    let steps = if axes.steps.is_empty() {
        vec![base.mpc.step]
    } else {
        axes.steps.clone()
    };
    let mut grid = Vec::new();
    for &n in &agents {
        for &k in &horizons {
            for &h in &steps {
                grid.push((n, k, h));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| grid.par_iter().map(|&(n, k, h)| run_cell(base, n, k, h)).collect())
}

fn run_cell(base: &Scenario, n: usize, k: usize, h: f64) -> SweepCell {
    let mut cell = SweepCell {
        n_agents: n,
        horizon: k,
        step: h,
        consensus_time: None,
        steps_completed: 0,
        max_solve_seconds: 0.0,
        mean_solve_seconds: 0.0,
        error: None,
    };
    let scenario = base.truncated(n).and_then(|mut s| {
        s.mpc.horizon = k;
        s.mpc.step = h;
        s.validate()?;
        Ok(s)
    });
    let scenario = match scenario {
        Ok(s) => s,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    let trace = match run(&scenario) {
        Ok(t) => t,
        Err(f) => {
            cell.error = Some(f.error.to_string());
            f.trace
        }
    };
    cell.consensus_time = consensus_time(&trace.metrics, scenario.consensus_epsilon);
    cell.steps_completed = trace.steps_recorded();
    cell.max_solve_seconds = trace.max_solve_time();
    cell.mean_solve_seconds = trace.mean_solve_time();
    cell
}

/// Writes the reproducible columns to `path` and solve times to `timing_path`.
pub fn write_sweep_csv(cells: &[SweepCell], path: &Path, timing_path: &Path) -> Result<(), SimError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "n_agents,horizon,step,consensus_time,steps_completed,error")?;
    for c in cells {
        let ct = c.consensus_time.map_or(String::new(), |t| format!("{t}"));
        let err = c.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            f,
            "{},{},{},{},{},{}",
            c.n_agents, c.horizon, c.step, ct, c.steps_completed, err
        )?;
    }
    f.flush()?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(timing_path)?);
    writeln!(f, "n_agents,horizon,step,max_solve_seconds,mean_solve_seconds")?;
    for c in cells {
        writeln!(
            f,
            "{},{},{},{:e},{:e}",
            c.n_agents, c.horizon, c.step, c.max_solve_seconds, c.mean_solve_seconds
        )?;
    }
    f.flush()?;
    Ok(())
}

/// Result of one monotonicity check over the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Horizon and team-size trends:
/// consensus time strictly falls with `K` at fixed `N`, does not rise with
/// `N` at fixed `K`, and the `K = 1` mean solve time stays below `K = 10`.
/// Unreached consensus counts as infinite time.
pub fn check_trends(cells: &[SweepCell]) -> Vec<TrendCheck> {
    let time = |c: &SweepCell| c.consensus_time.unwrap_or(f64::INFINITY);
    let mut agents: Vec<usize> = cells.iter().map(|c| c.n_agents).collect();
    agents.sort_unstable();
    agents.dedup();
    let mut horizons: Vec<usize> = cells.iter().map(|c| c.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();
    let cell = |n: usize, k: usize| cells.iter().find(|c| c.n_agents == n && c.horizon == k);
    let mut out = Vec::new();

    for &n in &agents {
        let times: Vec<f64> = horizons.iter().filter_map(|&k| cell(n, k)).map(time).collect();
        let passed = times.windows(2).all(|w| w[1] < w[0]) && times.iter().all(|t| t.is_finite());
        out.push(TrendCheck {
            name: format!("consensus time decreases with K at N={n}"),
            passed,
            detail: format!("{times:?}"),
        });
    }
    for &k in &horizons {
        let times: Vec<f64> = agents.iter().filter_map(|&n| cell(n, k)).map(time).collect();
        let passed = times.windows(2).all(|w| w[1] <= w[0]) && times.iter().all(|t| t.is_finite());
        out.push(TrendCheck {
            name: format!("consensus time does not increase with N at K={k}"),
            passed,
            detail: format!("{times:?}"),
        });
    }
    for &n in &agents {
        if let (Some(a), Some(b)) = (cell(n, 1), cell(n, 10)) {
            out.push(TrendCheck {
                name: format!("mean solve time K=1 below K=10 at N={n}"),
                passed: a.mean_solve_seconds < b.mean_solve_seconds,
                detail: format!("{:.3e} s vs {:.3e} s", a.mean_solve_seconds, b.mean_solve_seconds),
            });
        }
    }
    out
}
