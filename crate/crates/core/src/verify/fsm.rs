use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::kernel::{ConstHost, ControlState, Program, SignalEvent, SignalRole, Value};

/// One input letter: the signals present, with their payloads.
pub type Letter = Vec<(String, Option<Value>)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    /// Index into [`Fsm::out_sets`].
    pub out: u32,
    pub next: u32,
}

/// Flat Mealy machine. State 0 is the initial state and each state has one
/// transition per letter, in letter order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsm {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub letters: Vec<Letter>,
    /// Distinct output sets, as sorted indices into `outputs`.
    pub out_sets: Vec<Vec<u32>>,
    pub trans: Vec<Vec<Transition>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmissionStatus {
    PossiblyEmitted,
    NeverEmitted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionVerdict {
    pub signal: String,
    pub status: EmissionStatus,
    /// Input letters from the initial state; the last one emits `signal`.
    pub witness: Option<Vec<Letter>>,
}

#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions {
    pub max_states: usize,
    /// 0 picks the global rayon pool; 1 is sequential.
    pub workers: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            max_states: 5_000_000,
            workers: 1,
        }
    }
}

impl Fsm {
    pub fn state_count(&self) -> usize {
        self.trans.len()
    }

    pub fn transition_count(&self) -> usize {
        self.trans.iter().map(|t| t.len()).sum()
    }

    pub fn output_index(&self, name: &str) -> Option<u32> {
        self.outputs.iter().position(|o| o == name).map(|i| i as u32)
    }

    pub fn emits(&self, t: &Transition, output: u32) -> bool {
        self.out_sets[t.out as usize].binary_search(&output).is_ok()
    }

    /// Output names produced by running `letters` from the initial state.
    pub fn run(&self, letters: &[usize]) -> Vec<Vec<&str>> {
        let mut s = 0usize;
        letters
            .iter()
            .map(|&l| {
                let t = &self.trans[s][l];
                s = t.next as usize;
                self.out_sets[t.out as usize]
                    .iter()
                    .map(|&o| self.outputs[o as usize].as_str())
                    .collect()
            })
            .collect()
    }

    /// Longest shortest-path distance from the initial state.
    pub fn diameter(&self) -> usize {
        let mut depth = vec![usize::MAX; self.trans.len()];
        depth[0] = 0;
        let mut q = VecDeque::from([0usize]);
        let mut max = 0;
        while let Some(s) = q.pop_front() {
            max = max.max(depth[s]);
            for t in &self.trans[s] {
                if depth[t.next as usize] == usize::MAX {
                    depth[t.next as usize] = depth[s] + 1;
                    q.push_back(t.next as usize);
                }
            }
        }
        max
    }

    /// `state in-vector / out-vector next-state`, one transition per line,
    /// after `#` header lines naming the vector positions.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# inputs: {}", self.inputs.join(" "));
        let _ = writeln!(out, "# outputs: {}", self.outputs.join(" "));
        let _ = writeln!(out, "# states: {} initial: 0", self.state_count());
        let letter_bits: Vec<String> = self
            .letters
            .iter()
            .map(|l| {
                self.inputs
                    .iter()
                    .map(|i| if l.iter().any(|(n, _)| n == i) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        for (s, ts) in self.trans.iter().enumerate() {
            for (l, t) in ts.iter().enumerate() {
                let o: String = (0..self.outputs.len() as u32)
                    .map(|i| if self.emits(t, i) { '1' } else { '0' })
                    .collect();
                let _ = writeln!(out, "{s} {} / {o} {}", letter_bits[l], t.next);
            }
        }
        out
    }
}

fn letter_events(program: &Program, letter: &Letter) -> Result<Vec<SignalEvent>, VerifyError> {
    letter
        .iter()
        .map(|(n, v)| match v {
            None => program.event(n),
            Some(v) => program.event_with(n, *v),
        })
        .collect::<Result<_, _>>()
        .map_err(VerifyError::from)
}

/// Letters sorted by their signal-name vectors, names sorted within a letter.
pub fn sort_alphabet(mut alphabet: Vec<Letter>) -> Vec<Letter> {
    for l in alphabet.iter_mut() {
        l.sort_by(|a, b| a.0.cmp(&b.0));
    }
    alphabet.sort_by(|a, b| {
        let ka: Vec<&str> = a.iter().map(|x| x.0.as_str()).collect();
        let kb: Vec<&str> = b.iter().map(|x| x.0.as_str()).collect();
        ka.cmp(&kb)
    });
    alphabet.dedup();
    alphabet
}

type Expanded = Vec<(Vec<u32>, ControlState)>;

fn expand(program: &mut Program, state: &ControlState, letters: &[Vec<SignalEvent>]) -> Result<Expanded, VerifyError> {
    let outputs = program.output_ids();
    let mut res = Vec::with_capacity(letters.len());
    for l in letters {
        program.restore_control(state)?;
        if state.halted {
            res.push((Vec::new(), state.clone()));
            continue;
        }
        let r = program.react_with(l, &mut ConstHost)?;
        let outs = r
            .outputs
            .iter()
            .filter_map(|e| outputs.binary_search(&e.id).ok().map(|i| i as u32))
            .collect();
        res.push((outs, program.control_state()));
    }
    Ok(res)
}

/// Breadth-first enumeration of every control state reachable from the
/// program's current state under `alphabet`.
pub fn extract_fsm(program: &Program, alphabet: &[Letter], opts: &ExtractOptions) -> Result<Fsm, VerifyError> {
    let letters = sort_alphabet(alphabet.to_vec());
    for l in &letters {
        for (n, _) in l {
            let id = program
                .signal_id(n)
                .ok_or_else(|| VerifyError::UnknownSignal(n.clone()))?;
            if program.signals()[id.index()].role != SignalRole::Input {
                return Err(VerifyError::NotAnInput(n.clone()));
            }
        }
    }
    let events: Vec<Vec<SignalEvent>> = letters
        .iter()
        .map(|l| letter_events(program, l))
        .collect::<Result<_, _>>()?;
    let inputs = program
        .input_ids()
        .iter()
        .map(|i| program.signal_name(*i).to_string())
        .collect();
    let outputs = program
        .output_ids()
        .iter()
        .map(|i| program.signal_name(*i).to_string())
        .collect();

    let pool = match opts.workers {
        1 => None,
        0 => Some(rayon::ThreadPoolBuilder::new().build()),
        w => Some(rayon::ThreadPoolBuilder::new().num_threads(w).build()),
    }
    .transpose()
    .map_err(|e| VerifyError::Workers(e.to_string()))?;

    let mut ids: HashMap<ControlState, u32> = HashMap::new();
    let mut states: Vec<ControlState> = vec![program.control_state()];
    ids.insert(states[0].clone(), 0);
    let mut out_ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut out_sets: Vec<Vec<u32>> = Vec::new();
    let mut trans: Vec<Vec<Transition>> = Vec::new();
    let mut frontier: Vec<u32> = vec![0];
    let mut scratch = program.clone();

    while !frontier.is_empty() {
        let expanded: Vec<Result<Expanded, VerifyError>> = match &pool {
            None => frontier
                .iter()
                .map(|&s| expand(&mut scratch, &states[s as usize], &events))
                .collect(),
            Some(pool) => pool.install(|| {
                frontier
                    .par_iter()
                    .map_init(|| program.clone(), |p, &s| expand(p, &states[s as usize], &events))
                    .collect()
            }),
        };
        let mut next_frontier = Vec::new();
        for (&s, succ) in frontier.iter().zip(expanded) {
            let mut row = Vec::with_capacity(events.len());
            for (outs, cs) in succ? {
                let out = *out_ids.entry(outs.clone()).or_insert_with(|| {
                    out_sets.push(outs);
                    (out_sets.len() - 1) as u32
                });
                let next = match ids.get(&cs) {
                    Some(&id) => id,
                    None => {
                        let id = states.len() as u32;
                        if states.len() >= opts.max_states {
                            return Err(VerifyError::StateExplosion { limit: opts.max_states });
                        }
                        ids.insert(cs.clone(), id);
                        states.push(cs);
                        next_frontier.push(id);
                        id
                    }
                };
                row.push(Transition { out, next });
            }
            debug_assert_eq!(s as usize, trans.len());
            trans.push(row);
        }
        frontier = next_frontier;
    }

    Ok(Fsm {
        inputs,
        outputs,
        letters,
        out_sets,
        trans,
    })
}

/// Decides whether `signal` can be emitted; the witness is a shortest input
/// sequence, the lexicographically least among those.
pub fn check_emission(fsm: &Fsm, signal: &str) -> Result<EmissionVerdict, VerifyError> {
    let o = fsm
        .output_index(signal)
        .ok_or_else(|| VerifyError::UnknownSignal(signal.to_string()))?;
    let n = fsm.state_count();
    let mut parent: Vec<Option<(u32, u32)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut q = VecDeque::from([0u32]);
    let path = |parent: &[Option<(u32, u32)>], mut s: u32| {
        let mut p = Vec::new();
        while let Some((prev, l)) = parent[s as usize] {
            p.push(l as usize);
            s = prev;
        }
        p.reverse();
        p
    };
    while let Some(s) = q.pop_front() {
        for (l, t) in fsm.trans[s as usize].iter().enumerate() {
            if fsm.emits(t, o) {
                let mut w = path(&parent, s);
                w.push(l);
                return Ok(EmissionVerdict {
                    signal: signal.to_string(),
                    status: EmissionStatus::PossiblyEmitted,
                    witness: Some(w.into_iter().map(|l| fsm.letters[l].clone()).collect()),
                });
            }
            if !seen[t.next as usize] {
                seen[t.next as usize] = true;
                parent[t.next as usize] = Some((s, l as u32));
                q.push_back(t.next);
            }
        }
    }
    Ok(EmissionVerdict {
        signal: signal.to_string(),
        status: EmissionStatus::NeverEmitted,
        witness: None,
    })
}

/// Replays a witness on a fresh copy of the program; returns whether the
/// last reaction emits `signal`.
pub fn replay_witness(program: &Program, witness: &[Letter], signal: &str) -> Result<bool, VerifyError> {
    let id = program
        .signal_id(signal)
        .ok_or_else(|| VerifyError::UnknownSignal(signal.to_string()))?;
    let mut p = program.clone();
    let mut last = false;
    for l in witness {
        let ev = letter_events(&p, l)?;
        last = p.react_with(&ev, &mut ConstHost)?.emitted(id);
    }
    Ok(last)
}

/// Coarsest partition of states with equal outputs and equivalent
/// successors for every letter, computed by iterated signature refinement.
pub fn minimize(fsm: &Fsm) -> Fsm {
    let n = fsm.state_count();
    let mut block = vec![0u32; n];
    let mut count = 1usize;
    loop {
        let mut sig_ids: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        let mut next = vec![0u32; n];
        for s in 0..n {
            let sig: Vec<(u32, u32)> = fsm.trans[s].iter().map(|t| (t.out, block[t.next as usize])).collect();
            let k = sig_ids.len() as u32;
            next[s] = *sig_ids.entry((block[s], sig)).or_insert(k);
        }
        let new_count = sig_ids.len();
        block = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut rep = vec![usize::MAX; count];
    for (s, &b) in block.iter().enumerate() {
        if rep[b as usize] == usize::MAX {
            rep[b as usize] = s;
        }
    }
    let trans = rep
        .iter()
        .map(|&s| {
            fsm.trans[s]
                .iter()
                .map(|t| Transition {
                    out: t.out,
                    next: block[t.next as usize],
                })
                .collect()
        })
        .collect();
    Fsm { trans, ..fsm.clone() }
}
