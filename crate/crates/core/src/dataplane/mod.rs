//! Sample-range bookkeeping, ring-buffer connectors and the stage contract.

mod connector;
mod range;
mod stage;
mod topology;

pub use connector::Connector;
pub use range::{find_overlap, SampleRange};
pub use stage::{connect, ComputeCtx, ComputeFn, Computed, Planned, StageDescriptor, StageKind, StageRuntime};
pub use topology::{Edge, EdgeConfig, StageConfig, Topology, TopologyConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataplaneError {
    #[error("{stage}: needs {need} samples, upstream window holds {have}")]
    InsufficientData { stage: String, need: u64, have: u64 },
    #[error("output of {need} samples exceeds the {free} free samples downstream")]
    BufferOverrun { need: u64, free: u64 },
    #[error("{stage}: range {range} was not estimated or is already computed")]
    StaleRange { stage: String, range: SampleRange },
    #[error("{stage}: compute returned {got} bytes, expected {expected}")]
    OutputLength { stage: String, expected: usize, got: usize },
    #[error("{stage}: compute failed: {reason}")]
    ComputeFailed { stage: String, reason: String },
    #[error("{stage}: every port of that direction is already bound")]
    PortAlreadyBound { stage: String },
    #[error("{stage}: declared rate {declared} does not match connector rate {connector}")]
    RateMismatch {
        stage: String,
        declared: u64,
        connector: u64,
    },
    #[error("stage `{0}` declared twice")]
    DuplicateStage(String),
    #[error("unknown stage `{0}`")]
    UnknownStage(String),
    #[error("stage `{0}` has an unbound port")]
    DanglingPort(String),
    #[error("topology contains a cycle")]
    CyclicTopology,
    #[error("topology config: {0}")]
    Config(String),
}

impl DataplaneError {
    /// Fills in the stage name for errors raised by a connector.
    pub(crate) fn at(self, name: &str) -> Self {
        match self {
            DataplaneError::InsufficientData { stage, need, have } if stage.is_empty() => {
                DataplaneError::InsufficientData {
                    stage: name.into(),
                    need,
                    have,
                }
            }
            DataplaneError::StaleRange { stage, range } if stage.is_empty() => DataplaneError::StaleRange {
                stage: name.into(),
                range,
            },
            DataplaneError::OutputLength { stage, expected, got } if stage.is_empty() => DataplaneError::OutputLength {
                stage: name.into(),
                expected,
                got,
            },
            e => e,
        }
    }
}
