//! `bes`: run searches, replay traces, and run the theory experiments.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or parse error,
//! 3 task construction failure, 4 replay divergence.

mod config;
mod run;
mod theory;
mod trace;

use std::path::PathBuf;
use std::process::ExitCode;

use bes::theorylab::ShellPreset;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ModeArg, Overrides, RunConfig, ScoringArg, TriggerArg};
use theory::{ShellFile, SubgoalFile};

#[derive(Debug)]
pub struct Exit {
    code: u8,
    message: String,
}

impl Exit {
    pub fn io(message: String) -> Self {
        Self { code: 1, message }
    }

    pub fn config(message: String) -> Self {
        Self { code: 2, message }
    }

    pub fn task(message: String) -> Self {
        Self { code: 3, message }
    }

    pub fn diverged(message: String) -> Self {
        Self { code: 4, message }
    }
}

#[derive(Parser)]
#[command(name = "bes", version, about = "Bidirectional evolutionary search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one search and write its trace and summary.
    Run(RunArgs),
    /// Run a theory experiment.
    Theory {
        #[command(subcommand)]
        which: TheoryCommand,
    },
    /// Re-run a recorded trace and check every event matches.
    Replay {
        trace: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with [engine] and [task] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// arithmetic, bernoulli, markov or circles.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSONL trace output.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary JSON output; printed to stdout when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    scoring: Option<ScoringArg>,
    #[arg(long, value_enum)]
    decompose_trigger: Option<TriggerArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Correlated,
    Iid,
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Entropy-shell escape and block-splice surprise on a Markov chain.
    Shell {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report JSON; the CSV table goes next to it.
        #[arg(long, default_value = "shell_report.json")]
        out: PathBuf,
    },
    /// Joint versus separate sub-goal collection.
    Subgoals {
        #[arg(long)]
        config: Option<PathBuf>,
        /// One or more sub-goal counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "subgoals_report.json")]
        out: PathBuf,
    },
}

fn load_run_config(args: &RunArgs) -> Result<RunConfig, Exit> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Exit::config(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text).map_err(|e| Exit::config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        task: args.task.clone(),
        budget: args.budget,
        seed: args.seed,
        mode: args.mode,
        scoring: args.scoring,
        decompose_trigger: args.decompose_trigger,
    };
    cfg.apply(&overrides).map_err(Exit::config)?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load_run_config(&args)?;
            run::cmd_run(&cfg, args.trace.as_deref(), args.summary.as_deref())
        }
        Command::Replay { trace } => {
            let n = run::cmd_replay(&trace)?;
            println!("replay ok: {n} events match");
            Ok(())
        }
        Command::Theory { which } => match which {
            TheoryCommand::Shell { config, preset, epsilon, blocks, samples, horizons, seed, out } => {
                let mut file: ShellFile = match &config {
                    Some(path) => theory::load_toml(path)?,
                    None => ShellFile::default(),
                };
                if let Some(p) = preset {
                    file.preset = Some(match p {
                        PresetArg::Correlated => ShellPreset::Correlated,
                        PresetArg::Iid => ShellPreset::Iid,
                    });
                }
                file.epsilon = epsilon.or(file.epsilon);
                file.k_blocks = blocks.or(file.k_blocks);
                file.n_samples = samples.or(file.n_samples);
                file.horizons = horizons.or(file.horizons);
                file.seed = seed.or(file.seed);
                theory::cmd_shell(&file.into_config()?, &out).map(|_| ())
            }
            TheoryCommand::Subgoals { config, m, p, delta, trials, seed, out } => {
                let mut file: SubgoalFile = match &config {
                    Some(path) => theory::load_toml(path)?,
                    None => SubgoalFile::default(),
                };
                file.m = m.unwrap_or(file.m);
                file.p = p.unwrap_or(file.p);
                file.delta = delta.unwrap_or(file.delta);
                file.trials = trials.unwrap_or(file.trials);
                file.seed = seed.unwrap_or(file.seed);
                theory::cmd_subgoals(&file, &out).map(|_| ())
            }
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BES_LOG_LEVEL", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
