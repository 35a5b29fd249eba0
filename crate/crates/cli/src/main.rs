//! `bakerweyl`: runs one experiment command over a config file.
//!
//! Exit codes: 0 when every task succeeded, 1 when some task failed,
//! 2 for configuration or usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use bakerweyl::expio::{run_file, Command};
use bakerweyl::{Error, RunOptions};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bakerweyl",
    version,
    about = "Numerical lab for quantum open baker's maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dense spectra of the baker operator for every configured depth.
    Spectrum(RunArgs),
    /// Fourth-power sums, trace identities, inequality suites and Fekete bounds.
    Fup(RunArgs),
    /// Resonance counting curves and exponent fits.
    Count(RunArgs),
    /// Closed-form exponent grids.
    Theory(RunArgs),
    /// Additive energies and the energy exponent fit.
    Energy(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all logical cores.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Cmd::Spectrum(a) => (Command::Spectrum, a),
        Cmd::Fup(a) => (Command::Fup, a),
        Cmd::Count(a) => (Command::Count, a),
        Cmd::Theory(a) => (Command::Theory, a),
        Cmd::Energy(a) => (Command::Energy, a),
    };
    let opts = RunOptions {
        out: args.out,
        jobs: args.jobs,
    };
    match run_file(command, &args.config, &opts) {
        Ok(outcome) => {
            let m = &outcome.manifest;
            for t in m.tasks.iter().filter(|t| !t.detail.is_empty()) {
                eprintln!("{}: {:?}: {}", t.task, t.status, t.detail);
            }
            println!(
                "{}: {} tasks, {} failed, {} files in {}",
                m.command,
                m.tasks.len(),
                m.failed(),
                m.files.len(),
                outcome.out_dir.display()
            );
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
