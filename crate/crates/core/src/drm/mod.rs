//! Data-reactive scheduling: every stage is wrapped in a protocol automaton
//! exchanging Mark / Compute / Ack signals with its neighbours, so stages run
//! as soon as data and downstream credit are both available.

mod protocol;
mod run;

pub use protocol::{
    ack, avail, build_program, cancel, compute, mark, module, ready, take, Phase, StageState, Wiring, GLUE, INIT_RANGE,
    IP_ADDR, USER_QUIT,
};
pub use run::{LogEntry, PipelineRun, RunSummary};

use thiserror::Error;

use crate::dataplane::DataplaneError;
use crate::kernel::KernelError;

/// Ticks a stage spends on one item.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DrmMode {
    /// Estimate tick then compute tick, with a Rendez-Vous on every edge.
    #[default]
    TwoTick,
    /// Estimate and compute in one tick (unit-cost stages).
    Fast,
}

/// Protocol faults that can be injected to exercise the observers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DrmBug {
    /// The named stage acks upstream at its estimate tick instead of after computing.
    EarlyAck(String),
    /// The named stage never cancels the Rendez-Vous it takes on its upstream.
    DroppedCancel(String),
    /// Sinks never ack.
    MissingSinkAck,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DrmOptions {
    pub mode: DrmMode,
    /// Declare one `Avail_<stage>` input per stage gating its start.
    pub avail: bool,
    pub bug: Option<DrmBug>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DrmError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Dataplane(#[from] DataplaneError),
    #[error("topology needs at least one source and one sink")]
    NoSourceOrSink,
    #[error("edge {from} -> {to}: rates {out_rate} and {in_rate} differ")]
    IncompatibleRates {
        from: String,
        to: String,
        out_rate: u64,
        in_rate: u64,
    },
    #[error("edge {from} -> {to} cannot be switched: {reason}")]
    BadSwitch { from: String, to: String, reason: String },
    #[error("stage {0} was told to compute without an estimated range")]
    Desync(String),
    #[error("item-capped runs need availability inputs")]
    NeedsAvailability,
    #[error("no progress after {0} ticks")]
    Stalled(u64),
}
