//! `mdthresh`: moderate-deviation rejection thresholds from the command line.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use commands::{
    ChernoffArgs, LabArgs, LindleyArgs, RiskCurveArgs, TableArgs, TailsArgs, ThresholdArgs,
};
use output::Format;

pub const SEED_ENV: &str = "MDTHRESH_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl From<mdthresh::Error> for CliError {
    fn from(e: mdthresh::Error) -> Self {
        use mdthresh::Error as E;
        match e {
            E::Solver { .. }
            | E::Quadrature { .. }
            | E::NoThreshold { .. }
            | E::DegenerateCorrelation(_) => CliError::Numeric(e.to_string()),
            E::Domain { .. }
            | E::InvalidInput(_)
            | E::UnboundedLocalDensity
            | E::ImproperPrior(_)
            | E::Unsupported(_)
            | E::Parse { .. } => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mdthresh",
    version,
    about = "Bayes-risk-optimal rejection thresholds for point-null tests"
)]
pub struct Cli {
    /// RNG seed for Monte Carlo commands.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// key=value file with defaults for any long flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<String>,

    /// Round displayed values the way the published table does.
    #[arg(long, global = true)]
    pub paper_parity: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical value of the standardized statistic at one n.
    Threshold(ThresholdArgs),
    /// Risk-optimal, fixed-level and e-value cutoffs across n.
    Table(TableArgs),
    /// Type I, type II and total risk over a grid of cutoffs.
    RiskCurve(RiskCurveArgs),
    /// Tail probability of the sample mean at a deviation scale.
    Tails(TailsArgs),
    /// Chernoff information between two simple hypotheses.
    Chernoff(ChernoffArgs),
    /// Bayes factor and posterior at an observed t next to the boundary.
    Lindley(LindleyArgs),
    /// Simulation checks of the evidence expansions.
    Lab(LabArgs),
}

fn run(args: Vec<String>) -> Result<String, CliError> {
    let args = config::merge(args, &Cli::command())?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Ok(e.to_string());
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    commands::dispatch(&cli)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg.trim_end().trim_start_matches("error: "));
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}
