use std::path::PathBuf;
use std::process::ExitCode;

use aerowrench_cli::commands::{self, RunSettings};
use aerowrench_core::sim::EstimatorSelection;
use clap::{Args, Parser, Subcommand};

/// Closed-loop simulator and wrench-estimation benchmark for a two-quadrotor
/// shared-payload system.
#[derive(Parser)]
#[command(name = "aerowrench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name or path to a scenario JSON file.
    #[arg(long, default_value = "full-interaction")]
    scenario: String,
    /// Parameter JSON document (defaults embedded when omitted).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed override; all run randomness flows from it (default 42 from the
    /// scenario).
    #[arg(long)]
    seed: Option<u64>,
    /// Estimators to run, comma-separated subset of `agno,ekf`.
    #[arg(long, default_value = "agno,ekf")]
    estimators: String,
    /// Control/estimation period override [s].
    #[arg(long)]
    dt_control: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; write the CSV log and metrics JSON.
    Run(RunArgs),
    /// Print the observer stability certificate; exit 0 iff the gain
    /// condition holds.
    Verify {
        /// Parameter JSON document (defaults embedded when omitted).
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Sweep observer gains and noise scale over a grid; write an RMSE CSV.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Grid, e.g. `k0=0.39,0.78,1.56;k1=0.3;noise=0,1`.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Run both estimators and print the side-by-side comparison.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the CSV log and metrics JSON.
        #[arg(long)]
        write: bool,
    },
}

fn parse_estimators(text: &str) -> Result<EstimatorSelection, String> {
    let mut selection = EstimatorSelection {
        agno: false,
        ekf: false,
    };
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        match part.trim() {
            "agno" => selection.agno = true,
            "ekf" => selection.ekf = true,
            other => return Err(format!("unknown estimator '{other}' (use agno, ekf)")),
        }
    }
    if !(selection.agno || selection.ekf) {
        return Err("at least one estimator must be selected".into());
    }
    Ok(selection)
}

fn settings_from(args: &RunArgs) -> Result<RunSettings, String> {
    Ok(RunSettings {
        params: args.params.clone(),
        scenario: args.scenario.clone(),
        out: args.out.clone(),
        seed: args.seed,
        estimators: parse_estimators(&args.estimators)?,
        dt_control: args.dt_control,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("AEROWRENCH_LOG")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => settings_from(args).map(|s| commands::cmd_run(&s)),
        Command::Verify { params } => Ok(commands::cmd_verify(params.as_deref())),
        Command::Sweep { run, grid } => {
            settings_from(run).map(|s| commands::cmd_sweep(&s, grid.as_deref()))
        }
        Command::Compare { run, write } => {
            settings_from(run).map(|s| commands::cmd_compare(&s, *write))
        }
    };
    match outcome {
        Err(usage) => {
            eprintln!("{usage}");
            ExitCode::from(2)
        }
        Ok(Err(err)) => {
            eprintln!("{err:#}");
            ExitCode::from(2)
        }
        Ok(Ok(code)) => ExitCode::from(code as u8),
    }
}
