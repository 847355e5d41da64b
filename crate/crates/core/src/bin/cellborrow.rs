use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cellborrow::scenario::{self, Outcome, ScenarioError, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "cellborrow", version, about = "Channel borrowing and interference experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic blocking and utilization over the load grid.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded simulation over the load grid, with and without borrowing.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Number of replications; seeds run from the configured base seed.
        #[arg(long)]
        seeds: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SINR, capacity and outage along a distance sweep.
    Rf {
        #[arg(long)]
        config: PathBuf,
        /// none, reference-bifurcation, block-interfering or adjacent-bifurcation.
        #[arg(long)]
        strategy: String,
        /// start:stop:step in km.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Figure tables 9-14 as CSV.
    Figures {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        which: Option<Vec<u32>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulator against analytic blocking, plus invariant checks.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> Result<Outcome, ScenarioError> {
    match command {
        Command::Analyze { config, out } => scenario::analyze(&config, &out),
        Command::Simulate { config, seeds, out } => scenario::simulate(&config, seeds, out.as_deref()),
        Command::Rf {
            config,
            strategy,
            sweep,
            out,
        } => scenario::rf(&config, &strategy, sweep.as_deref(), out.as_deref()),
        Command::Figures { config, which, out } => {
            scenario::figures(&config, which.as_deref(), out.as_deref())
        }
        Command::Validate { config, out } => scenario::validate_command(&config, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
