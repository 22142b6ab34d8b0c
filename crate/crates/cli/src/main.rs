use std::path::PathBuf;
use std::process::ExitCode;

use blendflow_cli::{cmd_certify, cmd_compare, cmd_run, cmd_stationary, CliError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "blendflow", version, about = "Blended-gas pipeline simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write frames.csv, bounds.json and snapshots.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Comma-separated snapshot times in seconds, replacing those of the scenario.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
    },
    /// Check the synchronization envelope of a finished run and write cert.json.
    Certify {
        frames: PathBuf,
        bounds: PathBuf,
        #[arg(long)]
        t_star: Option<f64>,
        /// Defaults to the directory holding the frames file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full and the drift-flux model side by side and write compare.csv.
    Compare {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Integrate the stationary profile of the [stationary] section and write stationary.csv.
    Stationary {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario, out, snapshots } => {
            let s = cmd_run(&scenario, &out, snapshots)?;
            println!(
                "{} frames, {} snapshots, beta={:e}, eps_hat={:e} -> {}",
                s.frames,
                s.snapshots,
                s.bounds.beta,
                s.bounds.eps_hat,
                out.display()
            );
            if !s.bounds.compatible {
                eprintln!("warning: initial and boundary data violate the compatibility conditions");
            }
        }
        Command::Certify { frames, bounds, t_star, out } => {
            let out = out.unwrap_or_else(|| frames.parent().map(PathBuf::from).unwrap_or_default());
            let cert = cmd_certify(&frames, &bounds, t_star, &out, &mut std::io::stdout())?;
            if !cert.passed {
                return Err(CliError::CertificationFailed);
            }
        }
        Command::Compare { scenario, out } => {
            let s = cmd_compare(&scenario, &out)?;
            let s0 = s.s0.map_or_else(|| "undefined".to_string(), |v| format!("{v:e}"));
            println!(
                "terminal L^e={:e}, S0={s0}, final field distance={:e} ({} rows)",
                s.terminal_lyap, s.final_distance, s.rows
            );
        }
        Command::Stationary { scenario, out } => {
            let s = cmd_stationary(&scenario, &out)?;
            println!("outlet densities {:?}, flow rates {:?}", s.outlet, s.flow_rates);
            if let Some(r) = s.shooting_residual {
                println!("shooting residual {r:e}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
