use std::path::PathBuf;
use std::process::ExitCode;

use beliefplan_cli::commands::{cmd_check, cmd_gen, cmd_measure, cmd_oracle, cmd_plan, cmd_validate};
use beliefplan_cli::{CliError, EXIT_FAIL, EXIT_OK};
use beliefplan_core::planner::{LookaheadMode, DEFAULT_NODE_BUDGET};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "beliefplan",
    about = "Factored-POMDP planning with simplified belief states",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Track exact beliefs in the lookahead.
    True,
    /// Project every child belief onto the partition.
    Simplified,
}

impl From<ModeArg> for LookaheadMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::True => LookaheadMode::TrueBeliefs,
            ModeArg::Simplified => LookaheadMode::Simplified,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a model from the config's generator spec.
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a model file against every structural invariant.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Simulate the sparse-sampling policy and write a decision trace.
    Plan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print a human-readable table.
        #[arg(long)]
        pretty: bool,
    },
    /// Exhaustive lookahead from a belief: exact value and argmax.
    Oracle {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "simplified")]
        mode: ModeArg,
        /// JSON array with one probability per joint state; defaults to the
        /// model's initial belief.
        #[arg(long)]
        belief: Option<PathBuf>,
        /// JSON array of variable classes; defaults to the model's bundled
        /// classes, then one class per variable.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: f64,
        #[arg(long)]
        pretty: bool,
    },
    /// Measure simplification errors, mixing, and belief drift.
    Measure {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the tracking and drifting value-gap bounds.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Gen { config, out } => {
            cmd_gen(&config, out.as_deref(), &mut stdout)?;
            Ok(EXIT_OK)
        }
        Command::Validate { model } => {
            cmd_validate(&model, &mut stdout)?;
            Ok(EXIT_OK)
        }
        Command::Plan { config, out, pretty } => {
            cmd_plan(&config, out.as_deref(), pretty, &mut stdout)?;
            Ok(EXIT_OK)
        }
        Command::Oracle {
            model,
            depth,
            mode,
            belief,
            partition,
            budget,
            pretty,
        } => {
            cmd_oracle(
                &model,
                depth,
                mode.into(),
                belief.as_deref(),
                partition.as_deref(),
                budget,
                pretty,
                &mut stdout,
            )?;
            Ok(EXIT_OK)
        }
        Command::Measure { config, out } => {
            cmd_measure(&config, out.as_deref(), &mut stdout)?;
            Ok(EXIT_OK)
        }
        Command::Check { config, out } => {
            let pass = cmd_check(&config, out.as_deref(), &mut stdout)?;
            Ok(if pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
