use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::guard::{jointly_satisfiable, CGuard};
use super::{
    ControlAutomaton, Guard, KernelError, Result, SignalDecl, SignalEvent, SignalId, SignalKind, SignalRole, Target,
    Value, ValueSource,
};
use crate::dataplane::SampleRange;

/// Supplies payloads for [`ValueSource::Host`] emissions.
pub trait ValueHost {
    fn value(
        &mut self,
        automaton: usize,
        signal: SignalId,
        name: &str,
        kind: SignalKind,
    ) -> std::result::Result<Value, String>;
}

/// Rejects every host request.
pub struct NoHost;

impl ValueHost for NoHost {
    fn value(&mut self, _: usize, _: SignalId, _: &str, _: SignalKind) -> std::result::Result<Value, String> {
        Err("no value host attached".into())
    }
}

/// Answers every host request with a placeholder: the skip range at 0 or 0.
pub struct ConstHost;

impl ValueHost for ConstHost {
    fn value(&mut self, _: usize, _: SignalId, _: &str, kind: SignalKind) -> std::result::Result<Value, String> {
        Ok(match kind {
            SignalKind::Int => Value::Int(0),
            _ => Value::Range(SampleRange::skip(0)),
        })
    }
}

/// Declarative description a [`Program`] is compiled from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ProgramSpec {
    pub signals: Vec<SignalDecl>,
    pub automata: Vec<ControlAutomaton>,
    /// Input whose presence strongly aborts the whole program.
    pub abort: Option<String>,
}

/// Control configuration of a program, excluding the tick counter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ControlState {
    pub states: Vec<u32>,
    pub suspended: Vec<bool>,
    pub held: Vec<bool>,
    /// Previous-tick presence of the signals some guard reads through `pre`.
    pub pre: Vec<bool>,
    pub halted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalState {
    pub fingerprint: u64,
    pub tick: u64,
    pub control: ControlState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reaction {
    pub tick: u64,
    pub inputs: Vec<SignalEvent>,
    pub outputs: Vec<SignalEvent>,
    pub micro_steps: usize,
}

impl Reaction {
    pub fn emitted(&self, id: SignalId) -> bool {
        self.outputs.iter().any(|e| e.id == id)
    }

    pub fn value_of(&self, id: SignalId) -> Option<Value> {
        self.outputs.iter().find(|e| e.id == id).and_then(|e| e.value)
    }

    /// `tick=<n> in=<sig,...> out=<sig[=value],...> steps=<k>`
    pub fn trace_line(&self, program: &Program) -> String {
        let ins: Vec<&str> = self.inputs.iter().map(|e| program.signal_name(e.id)).collect();
        let mut out = String::new();
        for (i, e) in self.outputs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(program.signal_name(e.id));
            if let Some(v) = e.value {
                let _ = write!(out, "={v}");
            }
        }
        format!(
            "tick={} in={} out={} steps={}",
            self.tick,
            ins.join(","),
            out,
            self.micro_steps
        )
    }
}

#[derive(Clone, Debug)]
enum CValue {
    None,
    Const(Value),
    Forward(u32),
    Host,
}

#[derive(Clone, Debug)]
struct CEmit {
    sig: u32,
    value: CValue,
}

#[derive(Clone, Debug)]
enum CTarget {
    Go(u32),
    Branch(Vec<(CGuard, u32)>, u32),
}

#[derive(Clone, Debug)]
struct CTrans {
    guard: CGuard,
    monotone: bool,
    emits: Vec<CEmit>,
    target: CTarget,
}

#[derive(Clone, Debug)]
struct CAut {
    name: String,
    states: Vec<String>,
    initial: u32,
    by_state: Vec<Vec<CTrans>>,
    sustain: Vec<Vec<u32>>,
    suspendable: bool,
    rdv: Option<(u32, u32, Vec<bool>)>,
}

/// An executable synchronous program.
#[derive(Clone, Debug)]
pub struct Program {
    spec: Arc<ProgramSpec>,
    signals: Arc<Vec<SignalDecl>>,
    by_name: Arc<HashMap<String, u32>>,
    automata: Arc<Vec<CAut>>,
    pre_mask: Arc<Vec<u32>>,
    abort: Option<u32>,
    fingerprint: u64,
    cap: usize,
    states: Vec<u32>,
    suspended: Vec<bool>,
    held: Vec<bool>,
    pre: Vec<bool>,
    tick: u64,
    halted: bool,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl Program {
    /// Validates and compiles a program; all automata start in their initial
    /// states at tick 0.
    pub fn declare(spec: ProgramSpec) -> Result<Program> {
        let mut by_name = HashMap::new();
        for (i, s) in spec.signals.iter().enumerate() {
            if by_name.insert(s.name.clone(), i as u32).is_some() {
                return Err(KernelError::DuplicateSignal(s.name.clone()));
            }
        }
        let signals = spec.signals.clone();
        let is_input = |i: u32| signals[i as usize].role == SignalRole::Input;

        let mut seen_aut = BTreeSet::new();
        let mut automata = Vec::with_capacity(spec.automata.len());
        let mut pre_set = BTreeSet::new();
        for a in &spec.automata {
            if !seen_aut.insert(a.name.clone()) {
                return Err(KernelError::DuplicateAutomaton(a.name.clone()));
            }
            let c = compile_automaton(a, &by_name, &signals, &is_input)?;
            for ts in &c.by_state {
                for t in ts {
                    t.guard.pre_signals(&mut pre_set);
                    if let CTarget::Branch(cases, _) = &t.target {
                        for (g, _) in cases {
                            g.pre_signals(&mut pre_set);
                        }
                    }
                }
            }
            automata.push(c);
        }

        let abort = match &spec.abort {
            None => None,
            Some(name) => {
                let id = *by_name
                    .get(name)
                    .ok_or_else(|| KernelError::UnknownSignal(name.clone()))?;
                if !is_input(id) {
                    return Err(KernelError::NotAnInput(name.clone()));
                }
                Some(id)
            }
        };

        let fingerprint = fnv1a(format!("{spec:?}").as_bytes());
        let n_aut = automata.len();
        let states = automata.iter().map(|a| a.initial).collect();
        Ok(Program {
            cap: signals.len() + 1,
            pre: vec![false; signals.len()],
            signals: Arc::new(signals),
            by_name: Arc::new(by_name),
            automata: Arc::new(automata),
            pre_mask: Arc::new(pre_set.into_iter().collect()),
            abort,
            fingerprint,
            spec: Arc::new(spec),
            states,
            suspended: vec![false; n_aut],
            held: vec![false; n_aut],
            tick: 0,
            halted: false,
        })
    }

    pub fn spec(&self) -> &ProgramSpec {
        &self.spec
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn signals(&self) -> &[SignalDecl] {
        &self.signals
    }

    pub fn signal_id(&self, name: &str) -> Option<SignalId> {
        self.by_name.get(name).map(|i| SignalId(*i))
    }

    pub fn signal_name(&self, id: SignalId) -> &str {
        &self.signals[id.index()].name
    }

    pub fn micro_step_cap(&self) -> usize {
        self.cap
    }

    pub fn automaton_count(&self) -> usize {
        self.automata.len()
    }

    pub fn automaton_id(&self, name: &str) -> Option<usize> {
        self.automata.iter().position(|a| a.name == name)
    }

    pub fn automaton_name(&self, id: usize) -> &str {
        &self.automata[id].name
    }

    /// Total number of automaton states, summed over all automata.
    pub fn state_count(&self) -> usize {
        self.automata.iter().map(|a| a.states.len()).sum()
    }

    pub fn current_state(&self, automaton: usize) -> &str {
        &self.automata[automaton].states[self.states[automaton] as usize]
    }

    pub fn is_suspended(&self, automaton: usize) -> bool {
        self.suspended[automaton]
    }

    /// Forces an automaton into a named state, used when a running topology is
    /// rewired and control is carried over.
    pub fn set_state(&mut self, automaton: usize, state: &str) -> Result<()> {
        let a = self
            .automata
            .get(automaton)
            .ok_or_else(|| KernelError::UnknownAutomaton(automaton.to_string()))?;
        let ix = a
            .states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| KernelError::UnknownState {
                automaton: a.name.clone(),
                state: state.to_string(),
            })?;
        self.states[automaton] = ix as u32;
        Ok(())
    }

    pub fn input_ids(&self) -> Vec<SignalId> {
        (0..self.signals.len() as u32)
            .filter(|i| self.signals[*i as usize].role == SignalRole::Input)
            .map(SignalId)
            .collect()
    }

    /// Non-input signals, in declaration order.
    pub fn output_ids(&self) -> Vec<SignalId> {
        (0..self.signals.len() as u32)
            .filter(|i| self.signals[*i as usize].role != SignalRole::Input)
            .map(SignalId)
            .collect()
    }

    pub fn event(&self, name: &str) -> Result<SignalEvent> {
        let id = self
            .signal_id(name)
            .ok_or_else(|| KernelError::UnknownSignal(name.to_string()))?;
        Ok(SignalEvent {
            id,
            value: None,
            tick: self.tick,
        })
    }

    pub fn event_with(&self, name: &str, value: Value) -> Result<SignalEvent> {
        let mut e = self.event(name)?;
        e.value = Some(value);
        Ok(e)
    }

    /// Reacts to pure inputs given by name.
    pub fn react_names(&mut self, names: &[&str]) -> Result<Reaction> {
        let events = names.iter().map(|n| self.event(n)).collect::<Result<Vec<_>>>()?;
        self.react(&events)
    }

    pub fn react(&mut self, inputs: &[SignalEvent]) -> Result<Reaction> {
        self.react_with(inputs, &mut NoHost)
    }

    /// One synchronous tick. On error the program state is left untouched.
    pub fn react_with(&mut self, inputs: &[SignalEvent], host: &mut dyn ValueHost) -> Result<Reaction> {
        if self.halted {
            return Err(KernelError::Halted);
        }
        let n = self.signals.len();
        let tick = self.tick;
        let mut now = vec![false; n];
        let mut values: Vec<Option<Value>> = vec![None; n];

        for ev in inputs {
            let decl = self
                .signals
                .get(ev.id.index())
                .ok_or_else(|| KernelError::UnknownSignal(format!("#{}", ev.id.0)))?;
            if decl.role != SignalRole::Input {
                return Err(KernelError::NotAnInput(decl.name.clone()));
            }
            let ok = match (decl.kind, ev.value) {
                (SignalKind::Pure, None) => true,
                (k, Some(v)) => v.kind() == k,
                _ => false,
            };
            if !ok {
                return Err(KernelError::BadPayload {
                    signal: decl.name.clone(),
                });
            }
            self.put(&mut now, &mut values, ev.id.0, ev.value, tick)?;
        }
        let input_events = self.collect(&now, &values, true);

        if let Some(abort) = self.abort {
            if now[abort as usize] {
                self.halted = true;
                self.pre = now;
                self.tick += 1;
                return Ok(Reaction {
                    tick,
                    inputs: input_events,
                    outputs: Vec::new(),
                    micro_steps: 0,
                });
            }
        }

        let automata = Arc::clone(&self.automata);
        let active: Vec<bool> = automata
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let frozen_by_rdv = self.held[i]
                    && a.rdv
                        .as_ref()
                        .is_some_and(|(_, _, guarded)| guarded[self.states[i] as usize]);
                !self.suspended[i] && !frozen_by_rdv
            })
            .collect();

        for (i, a) in automata.iter().enumerate() {
            if active[i] {
                for &s in &a.sustain[self.states[i] as usize] {
                    self.put(&mut now, &mut values, s, None, tick)?;
                }
            }
        }

        let mut fired: Vec<Option<usize>> = vec![None; automata.len()];
        let mut rounds = 0usize;
        loop {
            let mut batch = Vec::new();
            for (i, a) in automata.iter().enumerate() {
                if !active[i] || fired[i].is_some() {
                    continue;
                }
                let st = self.states[i] as usize;
                if let Some(ti) = a.by_state[st]
                    .iter()
                    .position(|t| t.monotone && t.guard.eval(&now, &self.pre))
                {
                    batch.push((i, ti));
                }
            }
            if batch.is_empty() {
                break;
            }
            rounds += 1;
            if rounds > self.cap {
                return Err(KernelError::FixpointDivergence { tick, cap: self.cap });
            }
            for (i, ti) in batch {
                fired[i] = Some(ti);
                let t = &automata[i].by_state[self.states[i] as usize][ti];
                for e in &t.emits {
                    let v = match &e.value {
                        CValue::None => None,
                        CValue::Const(v) => Some(*v),
                        CValue::Forward(src) => {
                            if !now[*src as usize] {
                                return Err(KernelError::ForwardAbsent {
                                    tick,
                                    signal: self.signals[e.sig as usize].name.clone(),
                                    source_signal: self.signals[*src as usize].name.clone(),
                                });
                            }
                            values[*src as usize]
                        }
                        CValue::Host => {
                            let decl = &self.signals[e.sig as usize];
                            let v = host
                                .value(i, SignalId(e.sig), &decl.name, decl.kind)
                                .map_err(|reason| KernelError::HostValue {
                                    signal: decl.name.clone(),
                                    reason,
                                })?;
                            if v.kind() != decl.kind {
                                return Err(KernelError::HostValue {
                                    signal: decl.name.clone(),
                                    reason: "payload kind mismatch".into(),
                                });
                            }
                            Some(v)
                        }
                    };
                    self.put(&mut now, &mut values, e.sig, v, tick)?;
                }
            }
        }

        // Absence-testing transitions see the settled valuation.
        for (i, a) in automata.iter().enumerate() {
            if !active[i] || fired[i].is_some() {
                continue;
            }
            let st = self.states[i] as usize;
            fired[i] = a.by_state[st]
                .iter()
                .position(|t| !t.monotone && t.guard.eval(&now, &self.pre));
        }

        let mut next = self.states.clone();
        for (i, a) in automata.iter().enumerate() {
            if let Some(ti) = fired[i] {
                let t = &a.by_state[self.states[i] as usize][ti];
                next[i] = match &t.target {
                    CTarget::Go(s) => *s,
                    CTarget::Branch(cases, default) => cases
                        .iter()
                        .find(|(g, _)| g.eval(&now, &self.pre))
                        .map(|(_, s)| *s)
                        .unwrap_or(*default),
                };
            }
        }
        for (i, a) in automata.iter().enumerate() {
            if let Some((take, cancel, _)) = &a.rdv {
                if now[*cancel as usize] {
                    self.held[i] = false;
                } else if now[*take as usize] {
                    self.held[i] = true;
                }
            }
        }

        let outputs = self.collect(&now, &values, false);
        self.states = next;
        self.pre = now;
        self.tick += 1;
        Ok(Reaction {
            tick,
            inputs: input_events,
            outputs,
            micro_steps: rounds,
        })
    }

    fn put(&self, now: &mut [bool], values: &mut [Option<Value>], sig: u32, v: Option<Value>, tick: u64) -> Result<()> {
        let i = sig as usize;
        if now[i] {
            if values[i] != v {
                return Err(KernelError::ConflictingValuedEmission {
                    tick,
                    signal: self.signals[i].name.clone(),
                });
            }
        } else {
            now[i] = true;
            values[i] = v;
        }
        Ok(())
    }

    fn collect(&self, now: &[bool], values: &[Option<Value>], inputs: bool) -> Vec<SignalEvent> {
        (0..now.len())
            .filter(|&i| now[i] && ((self.signals[i].role == SignalRole::Input) == inputs))
            .map(|i| SignalEvent {
                id: SignalId(i as u32),
                value: values[i],
                tick: self.tick,
            })
            .collect()
    }

    pub fn suspend(&mut self, automaton: usize) -> Result<()> {
        let a = self
            .automata
            .get(automaton)
            .ok_or_else(|| KernelError::UnknownAutomaton(automaton.to_string()))?;
        if !a.suspendable {
            return Err(KernelError::NotSuspendable(a.name.clone()));
        }
        self.suspended[automaton] = true;
        Ok(())
    }

    pub fn resume(&mut self, automaton: usize) -> Result<()> {
        let a = self
            .automata
            .get(automaton)
            .ok_or_else(|| KernelError::UnknownAutomaton(automaton.to_string()))?;
        if !self.suspended[automaton] {
            return Err(KernelError::NotSuspended(a.name.clone()));
        }
        self.suspended[automaton] = false;
        Ok(())
    }

    pub fn control_state(&self) -> ControlState {
        ControlState {
            states: self.states.clone(),
            suspended: self.suspended.clone(),
            held: self.held.clone(),
            pre: self.pre_mask.iter().map(|&s| self.pre[s as usize]).collect(),
            halted: self.halted,
        }
    }

    pub fn snapshot(&self) -> GlobalState {
        GlobalState {
            fingerprint: self.fingerprint,
            tick: self.tick,
            control: self.control_state(),
        }
    }

    pub fn restore(&mut self, s: &GlobalState) -> Result<()> {
        if s.fingerprint != self.fingerprint {
            return Err(KernelError::IncompatibleSnapshot);
        }
        self.restore_control(&s.control)?;
        self.tick = s.tick;
        Ok(())
    }

    pub fn restore_control(&mut self, c: &ControlState) -> Result<()> {
        let n_aut = self.automata.len();
        if c.states.len() != n_aut
            || c.suspended.len() != n_aut
            || c.held.len() != n_aut
            || c.pre.len() != self.pre_mask.len()
            || c.states
                .iter()
                .zip(self.automata.iter())
                .any(|(s, a)| *s as usize >= a.states.len())
        {
            return Err(KernelError::IncompatibleSnapshot);
        }
        self.states.clone_from(&c.states);
        self.suspended.clone_from(&c.suspended);
        self.held.clone_from(&c.held);
        self.pre.iter_mut().for_each(|p| *p = false);
        for (k, &s) in self.pre_mask.iter().enumerate() {
            self.pre[s as usize] = c.pre[k];
        }
        self.halted = c.halted;
        Ok(())
    }
}

fn compile_automaton(
    a: &ControlAutomaton,
    by_name: &HashMap<String, u32>,
    signals: &[SignalDecl],
    is_input: &dyn Fn(u32) -> bool,
) -> Result<CAut> {
    let mut state_ix = HashMap::new();
    for (i, s) in a.states.iter().enumerate() {
        if state_ix.insert(s.clone(), i as u32).is_some() {
            return Err(KernelError::DuplicateState {
                automaton: a.name.clone(),
                state: s.clone(),
            });
        }
    }
    let st = |s: &str| {
        state_ix.get(s).copied().ok_or_else(|| KernelError::UnknownState {
            automaton: a.name.clone(),
            state: s.to_string(),
        })
    };
    let guard = |g: &Guard| {
        CGuard::compile(g, &mut |s| by_name.get(s).copied()).map_err(|signal| KernelError::UnknownSignalInGuard {
            automaton: a.name.clone(),
            signal,
        })
    };
    let target = |t: &Target| -> Result<CTarget> {
        Ok(match t {
            Target::Go(s) => CTarget::Go(st(s)?),
            Target::Branch { cases, default } => CTarget::Branch(
                cases
                    .iter()
                    .map(|(g, s)| Ok((guard(g)?, st(s)?)))
                    .collect::<Result<_>>()?,
                st(default)?,
            ),
        })
    };
    let sig = |name: &str| {
        by_name
            .get(name)
            .copied()
            .ok_or_else(|| KernelError::UnknownSignal(name.to_string()))
    };

    let initial = st(&a.initial)?;
    let mut by_state: Vec<Vec<CTrans>> = vec![Vec::new(); a.states.len()];
    for t in &a.transitions {
        let from = st(&t.from)?;
        let g = guard(&t.guard)?;
        let monotone = g.is_monotone(is_input);
        if !monotone && !t.emits.is_empty() {
            return Err(KernelError::AbsenceGuardedEmission {
                automaton: a.name.clone(),
                state: t.from.clone(),
            });
        }
        let mut emits = Vec::with_capacity(t.emits.len());
        for e in &t.emits {
            let id = sig(&e.signal)?;
            let decl = &signals[id as usize];
            if decl.role == SignalRole::Input {
                return Err(KernelError::EmitsInput {
                    automaton: a.name.clone(),
                    signal: e.signal.clone(),
                });
            }
            let bad = || KernelError::PayloadKind {
                automaton: a.name.clone(),
                signal: e.signal.clone(),
            };
            let value = match &e.value {
                ValueSource::None if decl.kind == SignalKind::Pure => CValue::None,
                ValueSource::Const(v) if v.kind() == decl.kind => CValue::Const(*v),
                ValueSource::Forward(src) => {
                    let sid = sig(src)?;
                    if signals[sid as usize].kind != decl.kind || decl.kind == SignalKind::Pure {
                        return Err(bad());
                    }
                    CValue::Forward(sid)
                }
                ValueSource::Host if decl.kind != SignalKind::Pure => CValue::Host,
                _ => return Err(bad()),
            };
            emits.push(CEmit { sig: id, value });
        }
        by_state[from as usize].push(CTrans {
            guard: g,
            monotone,
            emits,
            target: target(&t.to)?,
        });
    }

    for (s, ts) in by_state.iter().enumerate() {
        for i in 0..ts.len() {
            for j in (i + 1)..ts.len() {
                if jointly_satisfiable(&ts[i].guard, &ts[j].guard, signals.len()) {
                    return Err(KernelError::NondeterministicAutomaton {
                        automaton: a.name.clone(),
                        state: a.states[s].clone(),
                    });
                }
            }
        }
    }

    for (from, to) in &a.otherwise {
        let from_ix = st(from)? as usize;
        let others: Vec<CGuard> = by_state[from_ix].iter().map(|t| t.guard.clone()).collect();
        let g = CGuard::Not(Box::new(CGuard::Or(others)));
        let monotone = g.is_monotone(is_input);
        let target = target(to)?;
        by_state[from_ix].push(CTrans {
            guard: g,
            monotone,
            emits: Vec::new(),
            target,
        });
    }

    let mut sustain = vec![Vec::new(); a.states.len()];
    for (s, name) in &a.sustain {
        let id = sig(name)?;
        let decl = &signals[id as usize];
        if decl.role == SignalRole::Input {
            return Err(KernelError::EmitsInput {
                automaton: a.name.clone(),
                signal: name.clone(),
            });
        }
        if decl.kind != SignalKind::Pure {
            return Err(KernelError::PayloadKind {
                automaton: a.name.clone(),
                signal: name.clone(),
            });
        }
        sustain[st(s)? as usize].push(id);
    }

    let rdv = match &a.rendezvous {
        None => None,
        Some(r) => {
            let mut guarded = vec![false; a.states.len()];
            for s in &r.states {
                guarded[st(s)? as usize] = true;
            }
            Some((sig(&r.take)?, sig(&r.cancel)?, guarded))
        }
    };

    // Structural reachability over transition targets.
    let mut seen = vec![false; a.states.len()];
    let mut queue = VecDeque::from([initial]);
    seen[initial as usize] = true;
    while let Some(s) = queue.pop_front() {
        for t in &by_state[s as usize] {
            let succ: Vec<u32> = match &t.target {
                CTarget::Go(x) => vec![*x],
                CTarget::Branch(cases, d) => cases.iter().map(|(_, x)| *x).chain([*d]).collect(),
            };
            for x in succ {
                if !seen[x as usize] {
                    seen[x as usize] = true;
                    queue.push_back(x);
                }
            }
        }
    }
    if let Some(unreached) = seen.iter().position(|s| !s) {
        return Err(KernelError::UnreachableState {
            automaton: a.name.clone(),
            state: a.states[unreached].clone(),
        });
    }

    Ok(CAut {
        name: a.name.clone(),
        states: a.states.clone(),
        initial,
        by_state,
        sustain,
        suspendable: a.suspendable,
        rdv,
    })
}
