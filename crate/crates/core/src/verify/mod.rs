//! Explicit-state verification of control programs: FSM extraction by
//! snapshot/restore enumeration, synchronous observers, emission checks and
//! minimisation.

mod fsm;
mod observers;

pub use fsm::{
    check_emission, extract_fsm, minimize, replay_witness, sort_alphabet, EmissionStatus, EmissionVerdict,
    ExtractOptions, Fsm, Letter, Transition,
};
pub use observers::{
    compose, make_observer_s1, make_observer_s2, make_observer_s3, standard_observers, ObserverSpec, S1_VIOLATED,
    S2_VIOLATED, S3_VIOLATED,
};

use thiserror::Error;

use crate::dataplane::SampleRange;
use crate::drm;
use crate::kernel::{KernelError, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("`{0}` is not an input of the program")]
    NotAnInput(String),
    #[error("more than {limit} states")]
    StateExplosion { limit: usize },
    #[error("`{0}` is declared more than once")]
    SignalCollision(String),
    #[error("observer {observer} touches program signal `{signal}`")]
    ObserverInterference { observer: String, signal: String },
    #[error("tick bound must be positive, got {0}")]
    BadBound(u32),
    #[error("worker pool: {0}")]
    Workers(String),
}

/// Environment letters of the data-reactive boot sequence: no input,
/// `IP_Addr`, `InitRange` and both together.
pub fn drm_alphabet(init: SampleRange) -> Vec<Letter> {
    let range = (drm::INIT_RANGE.to_string(), Some(Value::Range(init)));
    sort_alphabet(vec![
        vec![],
        vec![(drm::IP_ADDR.to_string(), None)],
        vec![(drm::IP_ADDR.to_string(), None), range.clone()],
        vec![range],
    ])
}
