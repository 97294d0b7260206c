//! `timecoord`: run, certify and sweep time-coordination scenarios.

mod certify;
mod error;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use timecoord::sim::Scenario;

#[derive(Debug, Parser)]
#[command(name = "timecoord", version, about = "Distributed MPC time coordination simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write the trace, summary and plots.
    Run(RunArgs),
    /// Print the horizon-one convergence certificate and feasibility margins as JSON.
    Certify(CertifyArgs),
    /// Run a grid of agent counts, horizons and steps.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Override a field before validation, e.g. `--set mpc.horizon=5`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    /// Output directory.
    #[arg(long, env = "DMPC_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    /// Disturbance decay rate ν; defaults to the scenario's, else 1.
    #[arg(long)]
    nu: Option<f64>,
    /// Disturbance bound d for the margins; defaults to the scenario's synthetic d, else 0.
    #[arg(long)]
    d: Option<f64>,
    /// Amount added to the largest lower bound when choosing r_h.
    #[arg(long, default_value_t = 1e-3)]
    margin: f64,
    /// Largest step probed by the h_max search.
    #[arg(long, default_value_t = 10.0)]
    h_cap: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    /// Comma-separated agent counts.
    #[arg(long, value_delimiter = ',')]
    agents: Vec<usize>,
    /// Comma-separated prediction horizons.
    #[arg(long, value_delimiter = ',')]
    horizons: Vec<usize>,
    /// Comma-separated sampling steps in seconds.
    #[arg(long, value_delimiter = ',')]
    steps: Vec<f64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, env = "DMPC_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Fail unless the horizon and team-size trends hold.
    #[arg(long)]
    assert_trends: bool,
}

fn load(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.scenario.display())))?;
    Scenario::from_json_str_with(&text, &args.overrides).map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run::execute(a),
        Command::Certify(a) => certify::execute(a),
        Command::Sweep(a) => sweep::execute(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
