//! Tick-driven synchronous execution core.
//!
//! A [`Program`] is a set of [`ControlAutomaton`]s composed in lockstep. Each
//! call to [`Program::react`] is one logical tick:
//!
//! 1. environment inputs seed the signal valuation,
//! 2. automata that start the tick in a state with sustained signals emit them,
//! 3. every automaton that has not yet fired evaluates its monotone guards
//!    against the current valuation; the emissions of all firing transitions
//!    join the valuation (signals only ever turn on within a tick),
//! 4. step 3 repeats until a round fires nothing,
//! 5. automata that still have not fired evaluate their absence-testing
//!    (non-emitting) transitions against the final valuation,
//! 6. conditional targets are resolved against the final valuation and all
//!    state changes are committed at once.
//!
//! Same-tick absence can only influence *where an automaton goes*, never *what
//! it emits*. Emissions that depend on absence must test the previous tick via
//! [`Guard::Pre`].

mod automaton;
mod guard;
mod program;

pub use automaton::{ControlAutomaton, Emission, Rendezvous, Target, Transition, ValueSource};
pub use guard::Guard;
pub use program::{ConstHost, ControlState, GlobalState, NoHost, Program, ProgramSpec, Reaction, ValueHost};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataplane::SampleRange;

/// Index of a declared signal within one program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignalId(pub u32);

impl SignalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Payload kind of a signal, fixed at declaration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalKind {
    Pure,
    Range,
    Int,
}

/// Who may drive a signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalRole {
    /// Provided by the environment; never emitted by automata.
    Input,
    /// Emitted by automata and visible to the environment.
    Output,
    /// Emitted by automata, internal to the program.
    Local,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignalDecl {
    pub name: String,
    pub kind: SignalKind,
    pub role: SignalRole,
}

impl SignalDecl {
    pub fn new(name: impl Into<String>, kind: SignalKind, role: SignalRole) -> Self {
        SignalDecl {
            name: name.into(),
            kind,
            role,
        }
    }

    pub fn input(name: impl Into<String>) -> Self {
        Self::new(name, SignalKind::Pure, SignalRole::Input)
    }

    pub fn output(name: impl Into<String>) -> Self {
        Self::new(name, SignalKind::Pure, SignalRole::Output)
    }

    pub fn local(name: impl Into<String>) -> Self {
        Self::new(name, SignalKind::Pure, SignalRole::Local)
    }
}

/// Signal payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Value {
    Range(SampleRange),
    Int(i64),
}

impl Value {
    pub fn kind(&self) -> SignalKind {
        match self {
            Value::Range(_) => SignalKind::Range,
            Value::Int(_) => SignalKind::Int,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Range(r) => write!(f, "{}:{}", r.index, r.size),
            Value::Int(v) => write!(f, "{v}"),
        }
    }
}

/// A signal present during one tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignalEvent {
    pub id: SignalId,
    pub value: Option<Value>,
    pub tick: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("signal `{0}` declared twice")]
    DuplicateSignal(String),
    #[error("automaton `{0}` declared twice")]
    DuplicateAutomaton(String),
    #[error("automaton `{automaton}`: guard references undeclared signal `{signal}`")]
    UnknownSignalInGuard { automaton: String, signal: String },
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("automaton `{automaton}`: unknown state `{state}`")]
    UnknownState { automaton: String, state: String },
    #[error("automaton `{automaton}`: state `{state}` declared twice")]
    DuplicateState { automaton: String, state: String },
    #[error("automaton `{automaton}`: two transitions from `{state}` can be enabled together")]
    NondeterministicAutomaton { automaton: String, state: String },
    #[error("automaton `{automaton}`: state `{state}` is unreachable from the initial state")]
    UnreachableState { automaton: String, state: String },
    #[error("automaton `{automaton}`: transition from `{state}` tests same-tick absence and emits")]
    AbsenceGuardedEmission { automaton: String, state: String },
    #[error("automaton `{automaton}` emits input signal `{signal}`")]
    EmitsInput { automaton: String, signal: String },
    #[error("automaton `{automaton}`: payload source does not match kind of `{signal}`")]
    PayloadKind { automaton: String, signal: String },
    #[error("signal `{0}` is not an environment input")]
    NotAnInput(String),
    #[error("signal `{signal}` given a payload of the wrong kind")]
    BadPayload { signal: String },
    #[error("tick {tick}: micro-step cap {cap} exceeded")]
    FixpointDivergence { tick: u64, cap: usize },
    #[error("tick {tick}: `{signal}` emitted with conflicting payloads")]
    ConflictingValuedEmission { tick: u64, signal: String },
    #[error("tick {tick}: `{signal}` forwards the value of absent signal `{source_signal}`")]
    ForwardAbsent {
        tick: u64,
        signal: String,
        source_signal: String,
    },
    #[error("value host failed for `{signal}`: {reason}")]
    HostValue { signal: String, reason: String },
    #[error("program is halted")]
    Halted,
    #[error("unknown automaton `{0}`")]
    UnknownAutomaton(String),
    #[error("automaton `{0}` is not suspendable")]
    NotSuspendable(String),
    #[error("automaton `{0}` is not suspended")]
    NotSuspended(String),
    #[error("snapshot does not belong to this program")]
    IncompatibleSnapshot,
}

pub type Result<T, E = KernelError> = std::result::Result<T, E>;
