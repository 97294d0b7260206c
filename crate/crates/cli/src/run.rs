use std::fs;

use serde_json::json;
use timecoord::report::{gamma_plot, min_distance_plot};
use timecoord::sim::{corridor_metrics, run, RunSummary, TimingSummary};

use crate::error::CliError;
use crate::{load, RunArgs};

pub fn execute(args: &RunArgs) -> Result<(), CliError> {
    let scenario = load(&args.input)?;
    let (trace, failure) = match run(&scenario) {
        Ok(t) => (t, None),
        Err(f) => (f.trace, Some(f.error)),
    };
    fs::create_dir_all(&args.out)?;
    let paths = [
        "trace.csv",
        "timing.csv",
        "summary.json",
        "timing.json",
        "gamma.svg",
        "min_distance.svg",
    ]
    .map(|f| args.out.join(f));
    trace.write_csv(&paths[0])?;
    trace.write_timing_csv(&paths[1])?;

    let summary = RunSummary::new(&scenario, &trace, failure.as_ref().map(|e| e.to_string()));
    let corridor = scenario.corridor.map(|c| {
        let window_end = match &scenario.cost {
            timecoord::sim::scenario::CostSpec::Ordered { gamma2, .. }
            | timecoord::sim::scenario::CostSpec::Race { gamma2, .. } => *gamma2,
            timecoord::sim::scenario::CostSpec::Consensus => c.exit,
        };
        corridor_metrics(
            &trace,
            c.entry,
            c.exit,
            window_end,
            c.separation,
            scenario.consensus_epsilon,
        )
    });
    let mut doc = serde_json::to_value(&summary).expect("summary serializes");
    doc["corridor"] = serde_json::to_value(&corridor).expect("metrics serialize");
    fs::write(&paths[2], serde_json::to_string_pretty(&doc).expect("json") + "\n")?;
    let timing = TimingSummary::new(&trace);
    fs::write(&paths[3], serde_json::to_string_pretty(&timing).expect("json") + "\n")?;
    fs::write(&paths[4], gamma_plot(&trace))?;
    fs::write(
        &paths[5],
        min_distance_plot(&trace, scenario.corridor.map(|c| c.separation)),
    )?;

    let report = json!({
        "scenario": summary.scenario,
        "digest": summary.digest,
        "consensus_time": summary.consensus_time,
        "max_solve_seconds": timing.max_solve_seconds,
        "mean_solve_seconds": timing.mean_solve_seconds,
        "outputs": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    match failure {
        None => Ok(()),
        Some(e) => Err(CliError::Domain(format!("run aborted, partial trace kept: {e}"))),
    }
}
