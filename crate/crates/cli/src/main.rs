use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use ch_parareal_cli::{
    bounds, reproduce, run_experiment, CliError, ConfigSource, RunOutcome, RunStatus, TraceFile, PRESETS,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "ch-parareal",
    version,
    about = "Parareal experiments for the Cahn-Hilliard equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace (exit 0 converged, 2 iteration cap, 1 error)
    Run(ConfigSource),
    /// List the presets
    Presets,
    /// Print the contraction factors and bound per iteration without running Parareal
    Bounds {
        #[command(flatten)]
        source: ConfigSource,
        /// Last iteration to tabulate
        #[arg(long = "k-max", default_value_t = 10)]
        k_max: usize,
    },
    /// Re-run the configuration recorded in a trace and compare error columns
    Rerun {
        trace: PathBuf,
        /// Where to write the new trace
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run(source) => {
            let config = source.resolve()?;
            let outcome = run_experiment(&config)?;
            if config.output.is_none() {
                outcome.trace.write(io::stdout().lock())?;
            }
            report(&outcome);
            Ok(outcome.status.exit_code())
        }
        Command::Presets => {
            let mut out = io::stdout().lock();
            for p in &PRESETS {
                writeln!(out, "{:<24} {}", p.name, p.summary)?;
            }
            Ok(0)
        }
        Command::Bounds { source, k_max } => {
            let config = source.resolve()?;
            let report = bounds(&config, k_max)?;
            let mut out = io::stdout().lock();
            writeln!(out, "# algorithm = {}", config.algorithm)?;
            writeln!(out, "# alpha = {}", report.params.alpha)?;
            writeln!(out, "# beta = {}", report.params.beta)?;
            if let Some(c) = report.lte_constant {
                writeln!(out, "# C1 = {c}")?;
            }
            writeln!(out, "k,bound_over_e0")?;
            for (k, ratio) in report.ratios {
                writeln!(out, "{k},{ratio}")?;
            }
            Ok(0)
        }
        Command::Rerun { trace, output } => {
            let previous = TraceFile::load(&trace)?;
            let (outcome, same) = reproduce(&previous, output.clone())?;
            if output.is_none() {
                outcome.trace.write(io::stdout().lock())?;
            }
            report(&outcome);
            eprintln!(
                "error column {} {}",
                if same { "identical to" } else { "DIFFERS from" },
                trace.display()
            );
            Ok(if same { outcome.status.exit_code() } else { 1 })
        }
    }
}

fn report(outcome: &RunOutcome) {
    let last = outcome.trace.rows.last();
    match &outcome.status {
        RunStatus::Converged { iterations } => eprintln!(
            "converged after {iterations} iterations (error {:.3e})",
            last.map_or(0.0, |r| r.error)
        ),
        RunStatus::MaxIterReached => eprintln!(
            "iteration cap reached at k = {} (error {:.3e})",
            last.map_or(0, |r| r.k),
            last.map_or(f64::NAN, |r| r.error)
        ),
        RunStatus::Failed(message) => eprintln!(
            "solver failed after {} recorded iterations: {message}",
            outcome.trace.rows.len()
        ),
    }
}
