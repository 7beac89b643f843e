//! `syncdsp`: run, verify, replay and benchmark synchronous DSP pipelines.

mod commands;
mod config;
mod model;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Bug, FileConfig, Mode, Scheduler};

/// Error carrying the process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub const VIOLATION: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const EXPLOSION: u8 = 3;
    pub const RUNTIME: u8 = 4;

    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: Self::USAGE,
            msg: msg.into(),
        }
    }

    pub fn runtime(msg: impl ToString) -> Self {
        Failure {
            code: Self::RUNTIME,
            msg: msg.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "syncdsp", version, about = "Synchronous reactive DSP pipelines")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a topology on an input stream.
    Run(RunArgs),
    /// Check the observers against the control model of a topology.
    Verify(VerifyArgs),
    /// Play a witness back through the kernel.
    Replay(ReplayArgs),
    /// Compare pull and reactive scheduling tick counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Common {
    /// Topology file (TOML).
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Settings file (TOML); its values override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print structured JSON records instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    scheduler: Option<Scheduler>,
    /// Reactive protocol variant.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    ticks: Option<u64>,
    /// Frames to process; defaults to the whole input.
    #[arg(long)]
    items: Option<u64>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long = "out")]
    output: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BugArgs {
    #[arg(long, value_enum)]
    bug: Option<Bug>,
    /// Stage the bug is injected into; defaults to the first intermediate stage.
    #[arg(long)]
    bug_stage: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    bug: BugArgs,
    /// Comma-separated subset of s1,s2,s3.
    #[arg(long)]
    observers: Option<String>,
    /// Tick bound D of the latency observers.
    #[arg(long)]
    bound: Option<u32>,
    /// Where to write the witness of a violation.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(long)]
    max_states: Option<usize>,
    /// Enumeration threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the extracted FSM as a transition table.
    #[arg(long)]
    export_fsm: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    bug: BugArgs,
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Replay even when the model no longer matches the witness.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Length of the generated copy chain when no topology is given.
    #[arg(long, default_value_t = 7)]
    stages: usize,
    #[arg(long)]
    items: Option<u64>,
}

fn base(c: &Common) -> FileConfig {
    FileConfig {
        topology: c.topology.clone(),
        seed: c.seed,
        json: c.json.then_some(true),
        ..FileConfig::default()
    }
}

fn merged(c: &Common, flags: FileConfig) -> Result<FileConfig, Failure> {
    match &c.config {
        Some(p) => Ok(FileConfig::load(p)?.over(flags)),
        None => Ok(flags),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Run(a) => {
            let flags = FileConfig {
                scheduler: a.scheduler,
                mode: a.mode,
                ticks: a.ticks,
                items: a.items,
                input: a.input,
                output: a.output,
                trace: a.trace,
                ..base(&a.common)
            };
            commands::run(&merged(&a.common, flags)?)
        }
        Cmd::Verify(a) => {
            let flags = FileConfig {
                bug: a.bug.bug,
                bug_stage: a.bug.bug_stage,
                observers: a.observers,
                bound: a.bound,
                witness: a.witness,
                max_states: a.max_states,
                workers: a.workers,
                export_fsm: a.export_fsm,
                ..base(&a.common)
            };
            commands::verify(&merged(&a.common, flags)?)
        }
        Cmd::Replay(a) => {
            let flags = FileConfig {
                bug: a.bug.bug,
                bug_stage: a.bug.bug_stage,
                witness: a.witness,
                ..base(&a.common)
            };
            commands::replay(&merged(&a.common, flags)?, a.force)
        }
        Cmd::Bench(a) => {
            let flags = FileConfig {
                items: a.items,
                ..base(&a.common)
            };
            commands::bench(&merged(&a.common, flags)?, a.stages)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.msg.is_empty() {
                eprintln!("syncdsp: {}", f.msg);
            }
            ExitCode::from(f.code)
        }
    }
}
