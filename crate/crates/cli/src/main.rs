mod analyze;
mod coupling;
mod error;
mod examples;
mod report;
mod simulate;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::Result;

/// Exact analysis of dynamic sender-receiver games.
#[derive(Parser)]
#[command(name = "cheaptalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Invariant measure, babbling value, payoff polygons and strictness verdicts.
    Analyze { file: PathBuf },
    /// Block/quota construction: exact gaps per (N, delta), optional Monte Carlo.
    Simulate(simulate::Args),
    /// Fictitious-state coupling checks for one copula.
    Coupling(coupling::Args),
    /// Run the bundled games and compare against their known values.
    Examples(examples::Args),
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Analyze { file } => {
            let game = report::load_game(&file)?;
            let bundle = analyze::analyze(&game)?;
            report::write_json(out, &bundle)
        }
        Command::Simulate(args) => simulate::run(&args, out),
        Command::Coupling(args) => coupling::run(&args, out),
        Command::Examples(args) => examples::run(&args, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
