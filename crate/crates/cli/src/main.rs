//! `bdrr`: analyse and simulate design-based local-differential-privacy
//! protocols.
//!
//! Exit codes: 0 on success, 1 for internal errors, 2 for user/input errors.

mod commands;
mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn user(msg: String) -> Self {
        Self::User(msg)
    }

    pub fn internal(msg: String) -> Self {
        Self::Internal(msg)
    }
}

impl From<bdrr_core::Error> for CliError {
    fn from(e: bdrr_core::Error) -> Self {
        // every library error is a data or input condition
        Self::User(e.to_string())
    }
}

/// Shared privacy target: exactly one of theta or gamma.
#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct PrivacyArgs {
    /// High-probability mass theta as a rational, e.g. 3/4
    #[arg(long)]
    pub theta: Option<String>,
    /// Privacy ratio gamma = e^epsilon as a rational, e.g. 6
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum EstimatorArg {
    /// Closed-form gap estimator
    #[default]
    Closed,
    /// Moore-Penrose left inverse
    Mp,
    /// Distribution-weighted optimal estimator
    Cn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum FormatArg {
    #[default]
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "bdrr",
    version,
    about = "Block-design randomised response: exact LDP protocol analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List or show the built-in designs
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Classify a design and report the purity witness
    Verify {
        /// Catalog name or design JSON file
        design: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Derive protocol parameters and the transition matrix
    Protocol {
        design: String,
        #[command(flatten)]
        privacy: PrivacyArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Estimate the input distribution from observed counts
    Estimate {
        design: String,
        #[command(flatten)]
        privacy: PrivacyArgs,
        /// Counts JSON file: {"t": N, "f": [...]}
        #[arg(long)]
        counts: String,
        #[arg(long, value_enum, default_value_t)]
        estimator: EstimatorArg,
        /// Also report the Euclidean projection onto the simplex
        #[arg(long)]
        project_simplex: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Exact variances, bounds, and tightness for a design and distribution
    Risk {
        design: String,
        #[command(flatten)]
        privacy: PrivacyArgs,
        /// "uniform", a JSON file, or an inline comma list of rationals
        #[arg(long)]
        dist: String,
        /// Sample count
        #[arg(long)]
        t: u64,
        #[arg(long, value_enum, default_value_t)]
        estimator: EstimatorArg,
        /// Sweep theta over START,END,STEP and emit CSV
        #[arg(long)]
        sweep_theta: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Monte Carlo validation of the analytic formulas
    Simulate {
        design: String,
        #[command(flatten)]
        privacy: PrivacyArgs,
        #[arg(long)]
        dist: String,
        /// Samples per rep
        #[arg(long)]
        t: u64,
        /// Independent reps (at least 2)
        #[arg(long)]
        reps: u64,
        /// Master seed; rep i draws from substream (seed, i)
        #[arg(long)]
        seed: u64,
        /// json: summary report; csv: per-rep estimates
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Names and parameters of all built-in designs
    List {
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
        #[arg(long)]
        out: Option<String>,
    },
    /// Emit one design as JSON
    Show {
        name: String,
        #[arg(long)]
        out: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Catalog { action } => match action {
            CatalogAction::List { format, out } => commands::catalog_list(format, out.as_deref()),
            CatalogAction::Show { name, out } => commands::catalog_show(&name, out.as_deref()),
        },
        Command::Verify { design, out } => commands::verify(&design, out.as_deref()),
        Command::Protocol {
            design,
            privacy,
            out,
        } => commands::protocol(&design, &privacy, out.as_deref()),
        Command::Estimate {
            design,
            privacy,
            counts,
            estimator,
            project_simplex,
            out,
        } => commands::estimate(
            &design,
            &privacy,
            &counts,
            estimator,
            project_simplex,
            out.as_deref(),
        ),
        Command::Risk {
            design,
            privacy,
            dist,
            t,
            estimator,
            sweep_theta,
            out,
        } => commands::risk(
            &design,
            &privacy,
            &dist,
            t,
            estimator,
            sweep_theta.as_deref(),
            out.as_deref(),
        ),
        Command::Simulate {
            design,
            privacy,
            dist,
            t,
            reps,
            seed,
            format,
            out,
        } => commands::simulate(
            &design,
            &privacy,
            &dist,
            t,
            reps,
            seed,
            format,
            out.as_deref(),
        ),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            std::process::exit(1);
        }
    }
}
