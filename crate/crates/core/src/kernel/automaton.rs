use super::Guard;
use super::Value;

/// Where an emitted signal's payload comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValueSource {
    /// Pure signal.
    None,
    Const(Value),
    /// Copy the payload of another signal present in the same tick.
    Forward(String),
    /// Ask the program's [`ValueHost`](super::ValueHost) at emission time.
    Host,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Emission {
    pub signal: String,
    pub value: ValueSource,
}

impl Emission {
    pub fn pure(signal: impl Into<String>) -> Self {
        Emission {
            signal: signal.into(),
            value: ValueSource::None,
        }
    }

    pub fn host(signal: impl Into<String>) -> Self {
        Emission {
            signal: signal.into(),
            value: ValueSource::Host,
        }
    }

    pub fn forward(signal: impl Into<String>, from: impl Into<String>) -> Self {
        Emission {
            signal: signal.into(),
            value: ValueSource::Forward(from.into()),
        }
    }

    pub fn constant(signal: impl Into<String>, value: Value) -> Self {
        Emission {
            signal: signal.into(),
            value: ValueSource::Const(value),
        }
    }
}

/// Destination of a transition. `Branch` cases are tested in order against
/// the committed valuation of the tick.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Go(String),
    Branch {
        cases: Vec<(Guard, String)>,
        default: String,
    },
}

impl Target {
    pub(crate) fn states(&self) -> Vec<&str> {
        match self {
            Target::Go(s) => vec![s.as_str()],
            Target::Branch { cases, default } => cases
                .iter()
                .map(|(_, s)| s.as_str())
                .chain(std::iter::once(default.as_str()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: String,
    pub guard: Guard,
    pub emits: Vec<Emission>,
    pub to: Target,
}

/// Signal-driven suspension: `take` raises the hold flag at the end of its
/// tick, `cancel` clears it (cancel wins when both are present). While the
/// flag is up, the automaton is frozen whenever it sits in one of `states`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rendezvous {
    pub take: String,
    pub cancel: String,
    pub states: Vec<String>,
}

/// Guarded finite automaton over broadcast signals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ControlAutomaton {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    pub transitions: Vec<Transition>,
    /// (state, state-level fallback target) taken when nothing else fires.
    pub otherwise: Vec<(String, Target)>,
    /// (state, pure signal) emitted on every tick that starts in `state`.
    pub sustain: Vec<(String, String)>,
    pub suspendable: bool,
    pub rendezvous: Option<Rendezvous>,
}

impl ControlAutomaton {
    pub fn new(name: impl Into<String>, initial: impl Into<String>) -> Self {
        let initial = initial.into();
        ControlAutomaton {
            name: name.into(),
            states: vec![initial.clone()],
            initial,
            transitions: Vec::new(),
            otherwise: Vec::new(),
            sustain: Vec::new(),
            suspendable: false,
            rendezvous: None,
        }
    }

    /// Declares a state; a no-op when it exists already.
    pub fn state(mut self, name: impl Into<String>) -> Self {
        self.add_state(name);
        self
    }

    pub fn add_state(&mut self, name: impl Into<String>) {
        let name = name.into();
        if !self.states.contains(&name) {
            self.states.push(name);
        }
    }

    pub fn on(mut self, from: impl Into<String>, guard: Guard, emits: Vec<Emission>, to: impl Into<String>) -> Self {
        self.add_transition(from, guard, emits, Target::Go(to.into()));
        self
    }

    pub fn add_transition(&mut self, from: impl Into<String>, guard: Guard, emits: Vec<Emission>, to: Target) {
        let from = from.into();
        self.add_state(from.clone());
        for s in to.states() {
            self.add_state(s.to_string());
        }
        self.transitions.push(Transition { from, guard, emits, to });
    }

    pub fn otherwise(mut self, from: impl Into<String>, to: Target) -> Self {
        self.set_otherwise(from, to);
        self
    }

    pub fn set_otherwise(&mut self, from: impl Into<String>, to: Target) {
        let from = from.into();
        self.add_state(from.clone());
        for s in to.states() {
            self.add_state(s.to_string());
        }
        self.otherwise.retain(|(s, _)| *s != from);
        self.otherwise.push((from, to));
    }

    pub fn sustain(mut self, state: impl Into<String>, signal: impl Into<String>) -> Self {
        self.add_sustain(state, signal);
        self
    }

    pub fn add_sustain(&mut self, state: impl Into<String>, signal: impl Into<String>) {
        let state = state.into();
        self.add_state(state.clone());
        self.sustain.push((state, signal.into()));
    }

    pub fn suspendable(mut self) -> Self {
        self.suspendable = true;
        self
    }

    pub fn with_rendezvous(mut self, rdv: Rendezvous) -> Self {
        self.suspendable = true;
        self.rendezvous = Some(rdv);
        self
    }
}
