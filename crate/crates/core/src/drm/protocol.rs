use std::collections::HashMap;

use super::{DrmBug, DrmError, DrmMode, DrmOptions};
use crate::dataplane::{StageKind, Topology};
use crate::kernel::{
    ControlAutomaton, Emission, Guard, Program, ProgramSpec, Rendezvous, SignalDecl, SignalId, SignalKind, SignalRole,
    Target,
};

pub const IP_ADDR: &str = "IP_Addr";
pub const INIT_RANGE: &str = "InitRange";
pub const USER_QUIT: &str = "User_Quit";
pub const GLUE: &str = "glue";

pub fn mark(up: &str, down: &str) -> String {
    format!("Mark_{up}2{down}")
}
pub fn compute(up: &str, down: &str) -> String {
    format!("Compute_{up}2{down}")
}
pub fn ack(down: &str, up: &str) -> String {
    format!("Ack_{down}2{up}")
}
pub fn take(down: &str, up: &str) -> String {
    format!("Take_{down}2{up}")
}
pub fn cancel(down: &str, up: &str) -> String {
    format!("Cancel_{down}2{up}")
}
pub fn ready(stage: &str) -> String {
    format!("Ready_{stage}")
}
pub fn module(stage: &str) -> String {
    format!("{stage}_module")
}
pub fn avail(stage: &str) -> String {
    format!("Avail_{stage}")
}

/// Protocol phase of one stage automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Off,
    Idle,
    Est,
    Comp,
}

/// Decoded state of a stage automaton: phase, pending-data flag and one
/// credit bit per active output edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StageState {
    pub phase: Phase,
    pub data: bool,
    pub credits: Vec<bool>,
}

impl StageState {
    pub fn name(&self) -> String {
        let tag = match self.phase {
            Phase::Off => return "Off".into(),
            Phase::Idle => "Idle",
            Phase::Est => "Est",
            Phase::Comp => "Comp",
        };
        let bits: String = self.credits.iter().map(|c| if *c { '1' } else { '0' }).collect();
        format!("{tag}_d{}_c{bits}", self.data as u8)
    }

    pub fn parse(name: &str) -> Option<StageState> {
        if name == "Off" {
            return Some(StageState {
                phase: Phase::Off,
                data: false,
                credits: Vec::new(),
            });
        }
        let mut parts = name.split('_');
        let phase = match parts.next()? {
            "Idle" => Phase::Idle,
            "Est" => Phase::Est,
            "Comp" => Phase::Comp,
            _ => return None,
        };
        let data = match parts.next()? {
            "d0" => false,
            "d1" => true,
            _ => return None,
        };
        let c = parts.next()?.strip_prefix('c')?;
        let credits = c.chars().map(|ch| ch == '1').collect();
        Some(StageState { phase, data, credits })
    }
}

/// How a stage's signals map onto the data plane.
#[derive(Clone, Debug, Default)]
pub struct Wiring {
    /// Automaton id per topology stage; `None` for detached stages.
    pub automaton: Vec<Option<usize>>,
    /// Mark signal -> emitting stage.
    pub marks: HashMap<SignalId, usize>,
    /// Ack signal emitted by a stage -> that stage.
    pub acks: HashMap<SignalId, usize>,
    /// Compute signals emitted by sources -> source stage.
    pub source_computes: HashMap<SignalId, usize>,
    pub avail: Vec<Option<SignalId>>,
    /// Stage order along active edges, detached stages excluded.
    pub order: Vec<usize>,
}

struct Ends {
    name: String,
    kind: StageKind,
    up: Option<String>,
    downs: Vec<String>,
}

fn all_masks(m: usize) -> Vec<Vec<bool>> {
    (0..1u32 << m)
        .map(|x| (0..m).map(|j| x & (1 << j) != 0).collect())
        .collect()
}

/// Target that accumulates newly arrived data and credits.
fn accumulate(phase: Phase, data: bool, credits: &[bool], cin: Option<&str>, acks: &[String]) -> Target {
    let mut flags: Vec<(Option<usize>, &str)> = Vec::new();
    if let (false, Some(c)) = (data, cin) {
        flags.push((None, c));
    }
    for (j, a) in acks.iter().enumerate() {
        if !credits[j] {
            flags.push((Some(j), a));
        }
    }
    let state_for = |mask: u32| {
        let mut s = StageState {
            phase,
            data,
            credits: credits.to_vec(),
        };
        for (bit, (slot, _)) in flags.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                match slot {
                    None => s.data = true,
                    Some(j) => s.credits[*j] = true,
                }
            }
        }
        s.name()
    };
    if flags.is_empty() {
        return Target::Go(state_for(0));
    }
    let cases = (1..1u32 << flags.len())
        .rev()
        .map(|mask| {
            let g = Guard::and(flags.iter().enumerate().map(|(bit, (_, sig))| {
                if mask & (1 << bit) != 0 {
                    Guard::present(*sig)
                } else {
                    Guard::absent(*sig)
                }
            }));
            (g, state_for(mask))
        })
        .collect();
    Target::Branch {
        cases,
        default: state_for(0),
    }
}

fn stage_automaton(e: &Ends, opts: &DrmOptions) -> ControlAutomaton {
    let s = e.name.as_str();
    let is_source = e.kind == StageKind::Source;
    let m = e.downs.len();
    let ack_in: Vec<String> = e.downs.iter().map(|d| ack(d, s)).collect();
    let cin = e.up.as_ref().map(|u| compute(u, s));
    let early_ack = opts.bug == Some(DrmBug::EarlyAck(s.to_string()));
    let no_cancel = opts.bug == Some(DrmBug::DroppedCancel(s.to_string()));
    let no_ack = opts.bug == Some(DrmBug::MissingSinkAck) && e.kind == StageKind::Sink;

    let init = StageState {
        phase: Phase::Idle,
        data: false,
        credits: vec![!is_source; m],
    };
    let mut a = ControlAutomaton::new(s, "Off");
    a.add_transition("Off", Guard::present(module(s)), vec![], Target::Go(init.name()));

    let credits_ok = |c: &[bool]| Guard::and((0..m).filter(|j| !c[*j]).map(|j| Guard::present(ack_in[j].clone())));
    let with_avail = |g: Guard| {
        if opts.avail {
            Guard::and([g, Guard::present(avail(s))])
        } else {
            g
        }
    };
    let marks: Vec<Emission> = e.downs.iter().map(|d| Emission::host(mark(s, d))).collect();
    let computes: Vec<Emission> = e.downs.iter().map(|d| Emission::pure(compute(s, d))).collect();
    let ack_up: Vec<Emission> = e.up.iter().map(|u| Emission::host(ack(s, u))).collect();
    let data_vals: &[bool] = if is_source { &[false] } else { &[false, true] };

    for &d in data_vals {
        for c in all_masks(m) {
            let idle = StageState {
                phase: Phase::Idle,
                data: d,
                credits: c.clone(),
            };
            let zero = vec![false; m];
            match opts.mode {
                DrmMode::TwoTick => {
                    let input_ok = match (&cin, d) {
                        (Some(ci), false) => Guard::present(ci.clone()),
                        _ => Guard::True,
                    };
                    let go = with_avail(Guard::and([input_ok, credits_ok(&c)]));
                    let est = |data| {
                        StageState {
                            phase: Phase::Est,
                            data,
                            credits: zero.clone(),
                        }
                        .name()
                    };
                    let to = match (&cin, d) {
                        (Some(ci), true) => Target::Branch {
                            cases: vec![(Guard::present(ci.clone()), est(true))],
                            default: est(false),
                        },
                        _ => Target::Go(est(false)),
                    };
                    let takes = e.up.iter().map(|u| Emission::pure(take(s, u))).collect();
                    a.add_transition(idle.name(), go, takes, to);

                    // credits are spent on start, so estimating states hold none
                    let est_state = StageState {
                        phase: Phase::Est,
                        data: d,
                        credits: zero.clone(),
                    };
                    let mut emits = marks.clone();
                    if !no_cancel {
                        emits.extend(e.up.iter().map(|u| Emission::pure(cancel(s, u))));
                    }
                    if early_ack {
                        emits.extend(ack_up.clone());
                    }
                    if c == zero {
                        a.add_transition(
                            est_state.name(),
                            Guard::True,
                            emits,
                            accumulate(Phase::Comp, d, &c, cin.as_deref(), &ack_in),
                        );
                    }

                    let comp_state = StageState {
                        phase: Phase::Comp,
                        data: d,
                        credits: c.clone(),
                    };
                    let mut emits = computes.clone();
                    if !early_ack && !no_ack {
                        emits.extend(ack_up.clone());
                    }
                    a.add_transition(
                        comp_state.name(),
                        Guard::True,
                        emits,
                        accumulate(Phase::Idle, d, &c, cin.as_deref(), &ack_in),
                    );
                }
                DrmMode::Fast => {
                    if is_source || d {
                        let go = with_avail(credits_ok(&c));
                        let mut emits = marks.clone();
                        emits.extend(computes.clone());
                        if !no_ack {
                            emits.extend(ack_up.clone());
                        }
                        let after = accumulate(Phase::Idle, false, &zero, cin.as_deref(), &[]);
                        a.add_transition(idle.name(), go, emits, after);
                    }
                }
            }
            a.set_otherwise(idle.name(), accumulate(Phase::Idle, d, &c, cin.as_deref(), &ack_in));
            if !is_source && !d {
                a.add_sustain(idle.name(), ready(s));
            }
        }
    }
    if opts.mode == DrmMode::TwoTick && m == 1 {
        let comp_states = data_vals
            .iter()
            .flat_map(|&d| {
                [false, true].map(|c| {
                    StageState {
                        phase: Phase::Comp,
                        data: d,
                        credits: vec![c],
                    }
                    .name()
                })
            })
            .collect();
        a = a.with_rendezvous(Rendezvous {
            take: take(&e.downs[0], s),
            cancel: cancel(&e.downs[0], s),
            states: comp_states,
        });
    }
    a
}

/// Builds the control program for the active part of `topo`.
pub fn build_program(topo: &Topology, opts: &DrmOptions) -> Result<(Program, Wiring), DrmError> {
    let topo_order = topo.validate()?;
    let attached = |i: usize| topo.edges.iter().any(|e| e.active && (e.from == i || e.to == i));
    let order: Vec<usize> = topo_order.into_iter().filter(|&i| attached(i)).collect();
    if !order.iter().any(|&i| topo.stages[i].kind == StageKind::Source)
        || !order.iter().any(|&i| topo.stages[i].kind == StageKind::Sink)
    {
        return Err(DrmError::NoSourceOrSink);
    }

    let name = |i: usize| topo.stages[i].name.clone();
    let ends: Vec<Ends> = order
        .iter()
        .map(|&i| Ends {
            name: name(i),
            kind: topo.stages[i].kind,
            up: topo.active_in(i).map(|e| name(topo.edges[e].from)),
            downs: topo
                .active_outs(i)
                .into_iter()
                .map(|e| name(topo.edges[e].to))
                .collect(),
        })
        .collect();

    let mut signals = vec![
        SignalDecl::input(IP_ADDR),
        SignalDecl::new(INIT_RANGE, SignalKind::Range, SignalRole::Input),
        SignalDecl::input(USER_QUIT),
    ];
    let out = |n: String| SignalDecl::output(n);
    let ranged = |n: String| SignalDecl::new(n, SignalKind::Range, SignalRole::Output);
    for e in &ends {
        signals.push(out(module(&e.name)));
        if opts.avail {
            signals.push(SignalDecl::input(avail(&e.name)));
        }
        if e.kind != StageKind::Source {
            signals.push(out(ready(&e.name)));
        }
    }
    for e in &ends {
        for d in &e.downs {
            signals.push(ranged(mark(&e.name, d)));
            signals.push(out(compute(&e.name, d)));
            signals.push(ranged(ack(d, &e.name)));
            if opts.mode == DrmMode::TwoTick {
                signals.push(out(take(d, &e.name)));
                signals.push(out(cancel(d, &e.name)));
            }
        }
    }

    let mut automata: Vec<ControlAutomaton> = ends.iter().map(|e| stage_automaton(e, opts)).collect();
    let mut glue = ControlAutomaton::new(GLUE, "WaitIp");
    glue.add_transition(
        "WaitIp",
        Guard::present(IP_ADDR),
        ends.iter().map(|e| Emission::pure(module(&e.name))).collect(),
        Target::Go("WaitRange".into()),
    );
    let kick = ends
        .iter()
        .filter(|e| e.kind == StageKind::Source)
        .flat_map(|e| e.downs.iter().map(|d| Emission::forward(ack(d, &e.name), INIT_RANGE)))
        .collect();
    glue.add_transition(
        "WaitRange",
        Guard::present(INIT_RANGE),
        kick,
        Target::Go("Running".into()),
    );
    automata.push(glue);

    let program = Program::declare(ProgramSpec {
        signals,
        automata,
        abort: Some(USER_QUIT.into()),
    })?;

    let id = |n: &str| program.signal_id(n).expect("declared above");
    let mut w = Wiring {
        automaton: vec![None; topo.stages.len()],
        avail: vec![None; topo.stages.len()],
        order: order.clone(),
        ..Wiring::default()
    };
    for (k, (&i, e)) in order.iter().zip(&ends).enumerate() {
        w.automaton[i] = Some(k);
        if opts.avail {
            w.avail[i] = Some(id(&avail(&e.name)));
        }
        for d in &e.downs {
            w.marks.insert(id(&mark(&e.name, d)), i);
            if e.kind == StageKind::Source {
                w.source_computes.insert(id(&compute(&e.name, d)), i);
            }
        }
        if let Some(u) = &e.up {
            w.acks.insert(id(&ack(&e.name, u)), i);
        }
    }
    Ok((program, w))
}
