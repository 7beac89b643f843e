#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use syncdsp::dataplane::*;
use syncdsp::drm::*;
use syncdsp::kernel::{ConstHost, ControlState, Program, SignalEvent};
use syncdsp::verify::*;

pub const NAMES: [&str; 7] = ["src", "spcoder", "chcoder", "inleaver", "cipher", "mod", "snk"];

/// Chain of `n` copy stages at `rate`; seven-stage chains use the downlink names.
pub fn pass_chain(n: usize, rate: u64) -> Topology {
    let names: Vec<String> = (0..n)
        .map(|i| if n == 7 { NAMES[i].to_string() } else { format!("s{i}") })
        .collect();
    let f: ComputeFn = Arc::new(|_, b| Ok(b.to_vec()));
    let mut t = Topology::new();
    t.add_stage(StageDescriptor::source(
        names[0].clone(),
        rate,
        Arc::new(|c, _| Ok((0..c.output.size).map(|i| (c.output.index + i) as u8).collect())),
    ))
    .unwrap();
    for n in &names[1..n - 1] {
        t.add_stage(StageDescriptor::pass(n.clone(), rate)).unwrap();
    }
    t.add_stage(StageDescriptor::sink(names[n - 1].clone(), rate, f))
        .unwrap();
    for w in names.windows(2) {
        t.connect(&w[0], &w[1], rate, 1).unwrap();
    }
    t
}

pub fn two_tick(bug: Option<DrmBug>) -> DrmOptions {
    DrmOptions {
        mode: DrmMode::TwoTick,
        avail: false,
        bug,
    }
}

/// Control program of `topo` with the three standard observers at bound `d`.
pub fn observed(topo: &Topology, bug: Option<DrmBug>, d: u32) -> Program {
    let (p, _) = build_program(topo, &two_tick(bug)).unwrap();
    let obs = standard_observers(&p, topo, d).unwrap();
    compose(&p, &obs).unwrap()
}

pub fn alphabet(topo: &Topology) -> Vec<Letter> {
    let src = topo.stages.iter().find(|s| s.kind == StageKind::Source).unwrap();
    drm_alphabet(SampleRange::new(0, src.out_rate))
}

fn events(p: &Program, l: &Letter) -> Vec<SignalEvent> {
    l.iter()
        .map(|(n, v)| match v {
            None => p.event(n).unwrap(),
            Some(v) => p.event_with(n, *v).unwrap(),
        })
        .collect()
}

/// Every output emitted by some input sequence of length <= `depth`.
/// Sequences reaching an identical control state are explored once.
pub fn simulate_emitted(program: &Program, alphabet: &[Letter], depth: usize) -> BTreeSet<String> {
    let mut p = program.clone();
    let mut emitted = BTreeSet::new();
    let mut layer: Vec<ControlState> = vec![p.control_state()];
    let mut seen: HashSet<ControlState> = layer.iter().cloned().collect();
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &layer {
            for l in alphabet {
                p.restore_control(s).unwrap();
                if p.is_halted() {
                    continue;
                }
                let ev = events(&p, l);
                let r = p.react_with(&ev, &mut ConstHost).unwrap();
                for e in &r.outputs {
                    emitted.insert(p.signal_name(e.id).to_string());
                }
                let cs = p.control_state();
                if seen.insert(cs.clone()) {
                    next.push(cs);
                }
            }
        }
        layer = next;
    }
    emitted
}

/// Reachable control-state count by recursive depth-first search.
pub fn dfs_count(program: &Program, alphabet: &[Letter]) -> usize {
    fn go(p: &mut Program, s: ControlState, alphabet: &[Letter], seen: &mut HashSet<ControlState>) {
        if !seen.insert(s.clone()) {
            return;
        }
        for l in alphabet {
            p.restore_control(&s).unwrap();
            if p.is_halted() {
                return;
            }
            let ev = events(p, l);
            p.react_with(&ev, &mut ConstHost).unwrap();
            let n = p.control_state();
            go(p, n, alphabet, seen);
        }
    }
    let mut p = program.clone();
    let mut seen = HashSet::new();
    let s = p.control_state();
    go(&mut p, s, alphabet, &mut seen);
    seen.len()
}

/// Checks every output of a composed model against exhaustive simulation,
/// and replays every witness. Returns the number of outputs checked.
pub fn soundness(program: &Program, alphabet: &[Letter]) -> Result<usize, String> {
    let fsm = extract_fsm(program, alphabet, &ExtractOptions::default()).map_err(|e| e.to_string())?;
    let sim = simulate_emitted(program, alphabet, fsm.diameter() + 1);
    for o in &fsm.outputs {
        let v = check_emission(&fsm, o).map_err(|e| e.to_string())?;
        match v.status {
            EmissionStatus::NeverEmitted if sim.contains(o) => return Err(format!("{o}: never-emitted but simulated")),
            EmissionStatus::PossiblyEmitted => {
                if !sim.contains(o) {
                    return Err(format!("{o}: possibly-emitted but never simulated"));
                }
                let w = v.witness.unwrap();
                if !replay_witness(program, &w, o).map_err(|e| e.to_string())? {
                    return Err(format!("{o}: witness does not replay"));
                }
            }
            _ => {}
        }
    }
    Ok(fsm.outputs.len())
}
