use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    Drm,
    Dpm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    TwoTick,
    Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Bug {
    EarlyAck,
    DroppedCancel,
    MissingSinkAck,
}

/// Settings shared by every subcommand. Values from `--config` win over
/// flags, which win over the defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub topology: Option<PathBuf>,
    pub scheduler: Option<Scheduler>,
    pub mode: Option<Mode>,
    pub ticks: Option<u64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub seed: Option<u64>,
    pub json: Option<bool>,
    pub observers: Option<String>,
    pub bound: Option<u32>,
    pub bug: Option<Bug>,
    pub bug_stage: Option<String>,
    pub witness: Option<PathBuf>,
    pub max_states: Option<usize>,
    pub workers: Option<usize>,
    pub export_fsm: Option<PathBuf>,
    pub items: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
    }

    /// Fills every field left unset here from `flags`.
    pub fn over(self, flags: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: self.$f.or(flags.$f)),* } };
        }
        pick!(
            topology, scheduler, mode, ticks, input, output, trace, seed, json, observers, bound, bug, bug_stage,
            witness, max_states, workers, export_fsm, items
        )
    }
}

/// Resolved settings of `run`.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub topology: PathBuf,
    pub scheduler: Scheduler,
    pub mode: Mode,
    pub ticks: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub seed: u64,
    pub json: bool,
}

pub const DEFAULT_TICKS: u64 = 1_000_000;

impl RunConfig {
    pub fn resolve(c: &FileConfig) -> Result<Self, Failure> {
        let ticks = c.ticks.unwrap_or(DEFAULT_TICKS);
        if ticks == 0 {
            return Err(Failure::usage("tick limit must be positive"));
        }
        Ok(RunConfig {
            topology: c
                .topology
                .clone()
                .ok_or_else(|| Failure::usage("--topology is required"))?,
            scheduler: c.scheduler.unwrap_or(Scheduler::Drm),
            mode: c.mode.unwrap_or(Mode::TwoTick),
            ticks,
            input: c.input.clone(),
            output: c.output.clone(),
            trace: c.trace.clone(),
            seed: c.seed.unwrap_or(0),
            json: c.json.unwrap_or(false),
        })
    }
}
