use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinchain_experiments::{run_scenario, ExperimentConfig, ExperimentError, Result, Scenario};

#[derive(Parser)]
#[command(name = "spinchain", version, about = "Driven dissipative spin-chain experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and write its CSV table.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the scenario named in the config file.
        #[arg(long)]
        scenario: Option<String>,
        /// Directory for the output; the file is named after the scenario.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Run { config, scenario, out, workers } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(name) = scenario {
                cfg.scenario = name.parse::<Scenario>()?;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            let path = match (out, &cfg.output) {
                (Some(dir), _) => dir.join(format!("{}.csv", cfg.scenario)),
                (None, Some(file)) => file.clone(),
                (None, None) => PathBuf::from(format!("{}.csv", cfg.scenario)),
            };
            let table = run_scenario(&cfg)?;
            table.write_csv(&path)?;
            let flagged = table.column("converged").map_or(0, |c| c.iter().filter(|v| **v != 1.0).count());
            Ok(serde_json::json!({
                "status": "ok",
                "scenario": cfg.scenario.name(),
                "output": path,
                "rows": table.rows.len(),
                "flagged_rows": flagged,
            }))
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.validate()?;
            Ok(serde_json::json!({ "status": "ok", "scenario": cfg.scenario.name() }))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let line = serde_json::json!({ "status": "error", "kind": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(match e {
                ExperimentError::Config(_) | ExperimentError::Parse { .. } => 2,
                _ => 1,
            })
        }
    }
}
