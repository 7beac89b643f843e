use std::collections::BTreeSet;

use super::VerifyError;
use crate::dataplane::{StageKind, Topology};
use crate::drm;
use crate::kernel::{ControlAutomaton, Emission, Guard, Program, ProgramSpec, SignalDecl, SignalRole, Target};

pub const S1_VIOLATED: &str = "S1_VIOLATED";
pub const S2_VIOLATED: &str = "S2_VIOLATED";
pub const S3_VIOLATED: &str = "S3_VIOLATED";

/// Synchronous observer: automata reading the observed program's interface
/// and emitting `violation` when the property fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverSpec {
    pub name: String,
    pub automata: Vec<ControlAutomaton>,
    pub signals: Vec<SignalDecl>,
    pub violation: String,
    pub bound: Option<u32>,
}

fn require(program: &Program, names: &[&str]) -> Result<(), VerifyError> {
    for n in names {
        if program.signal_id(n).is_none() {
            return Err(VerifyError::UnknownSignal(n.to_string()));
        }
    }
    Ok(())
}

/// Violated when `compute` is emitted in a tick whose predecessor did not
/// have `ready`; one (compute, ready) pair per guarded hand-off.
pub fn make_observer_s1(program: &Program, pairs: &[(String, String)]) -> Result<ObserverSpec, VerifyError> {
    for (c, r) in pairs {
        require(program, &[c, r])?;
    }
    let bad = Guard::or(
        pairs
            .iter()
            .map(|(c, r)| Guard::and([Guard::present(c.clone()), Guard::not_pre(r.clone())])),
    );
    let a = ControlAutomaton::new("S1", "Watch").on("Watch", bad, vec![Emission::pure(S1_VIOLATED)], "Watch");
    Ok(ObserverSpec {
        name: "S1".into(),
        automata: vec![a],
        signals: vec![SignalDecl::output(S1_VIOLATED)],
        violation: S1_VIOLATED.into(),
        bound: None,
    })
}

/// `W --is--> C1 .. CD --> V`: each `Ck` leaves to `done` on `os`. The
/// violation is emitted from `V`, one tick after the deadline passed.
fn countdown(name: &str, is: Guard, os: Guard, d: u32, violation: &str, repeat: bool) -> ControlAutomaton {
    let done = if repeat { "W" } else { "Done" };
    let mut a = ControlAutomaton::new(name, "W");
    a.add_transition("W", is, vec![], Target::Go("C1".into()));
    for k in 1..=d {
        let from = format!("C{k}");
        a.add_transition(from.clone(), os.clone(), vec![], Target::Go(done.into()));
        let next = if k == d { "V".to_string() } else { format!("C{}", k + 1) };
        a.set_otherwise(from, Target::Go(next));
    }
    a.add_transition(
        "V",
        Guard::True,
        vec![Emission::pure(violation)],
        Target::Go(done.into()),
    );
    a
}

/// Violated when no `os` (any of) follows the first `is` (any of) within `d` ticks.
pub fn make_observer_s2(program: &Program, d: u32, is: &[String], os: &[String]) -> Result<ObserverSpec, VerifyError> {
    for n in is.iter().chain(os) {
        require(program, &[n])?;
    }
    if d == 0 {
        return Err(VerifyError::BadBound(d));
    }
    let g = |v: &[String]| Guard::or(v.iter().map(|s| Guard::present(s.clone())));
    Ok(ObserverSpec {
        name: "S2".into(),
        automata: vec![countdown("S2", g(is), g(os), d, S2_VIOLATED, false)],
        signals: vec![SignalDecl::output(S2_VIOLATED)],
        violation: S2_VIOLATED.into(),
        bound: Some(d),
    })
}

/// Violated whenever some `is` of a pair is not answered by its `os` within
/// `d` ticks; one looping automaton per pair.
pub fn make_observer_s3(program: &Program, d: u32, pairs: &[(String, String)]) -> Result<ObserverSpec, VerifyError> {
    if d == 0 {
        return Err(VerifyError::BadBound(d));
    }
    let mut automata = Vec::new();
    for (k, (is, os)) in pairs.iter().enumerate() {
        require(program, &[is, os])?;
        automata.push(countdown(
            &format!("S3_{k}"),
            Guard::present(is.clone()),
            Guard::present(os.clone()),
            d,
            S3_VIOLATED,
            true,
        ));
    }
    Ok(ObserverSpec {
        name: "S3".into(),
        automata,
        signals: vec![SignalDecl::output(S3_VIOLATED)],
        violation: S3_VIOLATED.into(),
        bound: Some(d),
    })
}

/// Runs observers in parallel with `program`. Observers may only read the
/// program's inputs and outputs and only emit their own signals.
pub fn compose(program: &Program, observers: &[ObserverSpec]) -> Result<Program, VerifyError> {
    if observers.is_empty() {
        return Ok(program.clone());
    }
    let mut spec: ProgramSpec = program.spec().clone();
    let mut taken: BTreeSet<String> = spec.signals.iter().map(|s| s.name.clone()).collect();
    let mut automata: BTreeSet<String> = spec.automata.iter().map(|a| a.name.clone()).collect();
    for ob in observers {
        let own: BTreeSet<&str> = ob.signals.iter().map(|s| s.name.as_str()).collect();
        for s in &ob.signals {
            if !taken.insert(s.name.clone()) {
                return Err(VerifyError::SignalCollision(s.name.clone()));
            }
        }
        for a in &ob.automata {
            if !automata.insert(a.name.clone()) {
                return Err(VerifyError::SignalCollision(a.name.clone()));
            }
            let mut read = BTreeSet::new();
            for t in &a.transitions {
                t.guard.names(&mut read);
                for e in &t.emits {
                    if !own.contains(e.signal.as_str()) {
                        return Err(VerifyError::ObserverInterference {
                            observer: ob.name.clone(),
                            signal: e.signal.clone(),
                        });
                    }
                }
            }
            for n in read {
                let internal = spec.signals.iter().any(|s| s.name == n && s.role == SignalRole::Local);
                if internal {
                    return Err(VerifyError::ObserverInterference {
                        observer: ob.name.clone(),
                        signal: n,
                    });
                }
            }
        }
        spec.signals.extend(ob.signals.iter().cloned());
        spec.automata.extend(ob.automata.iter().cloned());
    }
    Ok(Program::declare(spec)?)
}

/// S1, S2 and S3 instantiated for a data-reactive program built from `topo`.
pub fn standard_observers(program: &Program, topo: &Topology, d: u32) -> Result<Vec<ObserverSpec>, VerifyError> {
    let active: Vec<(String, String, StageKind, StageKind)> = topo
        .edges
        .iter()
        .filter(|e| e.active)
        .map(|e| {
            let (u, v) = (&topo.stages[e.from], &topo.stages[e.to]);
            (u.name.clone(), v.name.clone(), u.kind, v.kind)
        })
        .collect();
    let s1: Vec<(String, String)> = active
        .iter()
        .map(|(u, v, _, _)| (drm::compute(u, v), drm::ready(v)))
        .collect();
    let is: Vec<String> = active
        .iter()
        .filter(|e| e.2 == StageKind::Source)
        .map(|(u, v, _, _)| drm::ack(v, u))
        .collect();
    let os: Vec<String> = active
        .iter()
        .filter(|e| e.3 == StageKind::Sink)
        .map(|(u, v, _, _)| drm::ack(v, u))
        .collect();
    let mut s3 = Vec::new();
    for (u, v, uk, _) in &active {
        if *uk == StageKind::Source {
            s3.push((drm::ack(v, u), drm::compute(u, v)));
        }
        s3.push((drm::compute(u, v), drm::ack(v, u)));
    }
    Ok(vec![
        make_observer_s1(program, &s1)?,
        make_observer_s2(program, d, &is, &os)?,
        make_observer_s3(program, d, &s3)?,
    ])
}
