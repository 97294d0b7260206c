use std::fs;

use timecoord::sim::{check_trends, sweep, write_sweep_csv, SweepAxes};

use crate::error::CliError;
use crate::{load, SweepArgs};

pub fn execute(args: &SweepArgs) -> Result<(), CliError> {
    let scenario = load(&args.input)?;
    let axes = SweepAxes {
        agents: args.agents.clone(),
        horizons: args.horizons.clone(),
        steps: args.steps.clone(),
    };
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cells = sweep(&scenario, &axes, threads);
    fs::create_dir_all(&args.out)?;
    let (table, timing) = (args.out.join("sweep.csv"), args.out.join("sweep_timing.csv"));
    write_sweep_csv(&cells, &table, &timing)?;

    println!(
        "{:>4} {:>4} {:>8} {:>12} {:>14}  error",
        "N", "K", "h", "consensus_s", "max_solve_s"
    );
    for c in &cells {
        let ct = c.consensus_time.map_or("-".to_string(), |t| format!("{t:.2}"));
        println!(
            "{:>4} {:>4} {:>8} {:>12} {:>14.3e}  {}",
            c.n_agents,
            c.horizon,
            c.step,
            ct,
            c.max_solve_seconds,
            c.error.as_deref().unwrap_or("")
        );
    }
    println!("wrote {} and {}", table.display(), timing.display());

    if args.assert_trends {
        let checks = check_trends(&cells);
        let mut failed = 0;
        for c in &checks {
            println!("[{}] {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            failed += usize::from(!c.passed);
        }
        if failed > 0 {
            return Err(CliError::Domain(format!("{failed} trend check(s) failed")));
        }
    }
    Ok(())
}
