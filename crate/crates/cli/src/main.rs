//! `alerting-experiments`: drive the alerting-protocol toolkit from
//! the command line.
//!
//! Subcommands: `analyze` (closed-form comparison table), `simulate`
//! (seeded monte-carlo rounds), `attack-demo` (the early-opening
//! bribery walkthrough), `verify` (self-check suites). Exit codes:
//! 0 success, 1 invariant violation, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use alerting_cli::config::{ExperimentSpec, Overrides};
use alerting_cli::{analyze, attack, simulate, verify, write_output, CliError};

#[derive(Parser)]
#[command(
    name = "alerting-experiments",
    version,
    about = "Simulator and analysis toolkit for bribery-resistant on-chain alerting protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Experiment description file (TOML); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every per-trial seed derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the primary output (CSV) here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the run to one protocol
    /// (burned-penalty | lockstep | tee | naive | sequential).
    #[arg(long)]
    protocol: Option<String>,
    /// Monte-carlo rounds per grid point.
    #[arg(long)]
    trials: Option<u32>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            protocol: self.protocol.clone(),
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
        }
    }

    fn spec(&self) -> Result<ExperimentSpec, CliError> {
        ExperimentSpec::load(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form protocol comparison: bribery resistance, transaction
    /// footprint, and latency class for every grid point.
    Analyze(CommonArgs),
    /// Seeded monte-carlo rounds with rational nodes; reports empirical
    /// suppression rates and adversary utility with confidence bounds.
    Simulate(CommonArgs),
    /// Early-opening bribery walkthrough: plain-hash commit-reveal
    /// falls for a near-linear budget, device-backed commitments don't.
    AttackDemo(CommonArgs),
    /// Run the self-check suites (closed forms vs. enumeration, engines
    /// vs. predictions, conservation).
    Verify(CommonArgs),
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_output(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_analyze(args: &CommonArgs) -> Result<(), CliError> {
    let spec = args.spec()?;
    let rows = analyze::analyze_rows(&spec);
    let csv = analyze::to_csv(&rows);
    let out = args.out.clone().or(spec.out);
    emit(out.as_ref(), &csv)?;
    eprintln!(
        "analyze: {} rows ({} protocols x {} grid points)",
        rows.len(),
        spec.protocols.len(),
        spec.grid.len()
    );
    Ok(())
}

fn cmd_simulate(args: &CommonArgs) -> Result<(), CliError> {
    let spec = args.spec()?;
    let cells = simulate::run_simulation(&spec)?;
    let csv = simulate::to_csv(&cells);
    let out = args.out.clone().or(spec.out.clone());
    emit(out.as_ref(), &csv)?;
    eprintln!(
        "simulate: {} trials per cell, master seed {} (rerun with --seed {} to reproduce)",
        spec.trials, spec.seed, spec.seed
    );
    for line in simulate::summary_lines(&cells) {
        eprintln!("{line}");
    }
    Ok(())
}

fn cmd_attack_demo(args: &CommonArgs) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or(7);
    let rows = attack::run_attack_demo(seed)?;
    let report = attack::report_lines(&rows).join("\n") + "\n";
    emit(args.out.as_ref(), &report)
}

fn cmd_verify() -> Result<(), CliError> {
    let mut failures = 0usize;
    for check in verify::run_verify() {
        match check.outcome {
            Ok(detail) => println!("[pass] {}: {detail}", check.name),
            Err(reason) => {
                failures += 1;
                println!("[FAIL] {}: {reason}", check.name);
            }
        }
    }
    if failures > 0 {
        return Err(CliError::Invariant(format!("{failures} self-check(s) failed")));
    }
    println!("all self-checks passed");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::AttackDemo(args) => cmd_attack_demo(args),
        Command::Verify(_) => cmd_verify(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
