use std::collections::HashMap;
use std::fmt;

use super::protocol::{build_program, Phase, StageState, Wiring, GLUE, INIT_RANGE, IP_ADDR};
use super::{DrmError, DrmOptions};
use crate::dataplane::{Connector, DataplaneError, Planned, SampleRange, StageKind, StageRuntime, Topology};
use crate::kernel::{Program, Reaction, SignalEvent, SignalId, SignalKind, Value, ValueHost};

/// One compute (or one dropped range) in a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub tick: u64,
    pub stage: usize,
    pub input: SampleRange,
    pub output: SampleRange,
    pub skipped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub stages: usize,
    pub ticks: u64,
    pub produced: u64,
    pub consumed: u64,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stages={} ticks={} produced={} consumed={}",
            self.stages, self.ticks, self.produced, self.consumed
        )
    }
}

/// A topology executing under the data-reactive protocol.
pub struct PipelineRun {
    topo: Topology,
    opts: DrmOptions,
    program: Program,
    wiring: Wiring,
    runtimes: Vec<StageRuntime>,
    connectors: Vec<Connector>,
    init_range: SampleRange,
    items: Option<u64>,
    pub reactions: Vec<Reaction>,
    pub log: Vec<LogEntry>,
    sink_bytes: Vec<Vec<u8>>,
    acks: Vec<u64>,
    produced: u64,
    consumed: u64,
}

struct Host<'a> {
    wiring: &'a Wiring,
    topo: &'a Topology,
    runtimes: &'a mut [StageRuntime],
    connectors: &'a [Connector],
    init_range: SampleRange,
    to_compute: Vec<bool>,
    acks: &'a mut [u64],
    failure: Option<DataplaneError>,
}

impl Host<'_> {
    fn plan(&mut self, stage: usize) -> Result<Planned, String> {
        if let Some(p) = self.runtimes[stage].pending() {
            return Ok(*p);
        }
        let upstream = match self.topo.active_in(stage) {
            None => self.init_range,
            Some(e) => self.connectors[e].window(),
        };
        self.runtimes[stage].estimate(upstream).map_err(|e| {
            let msg = e.to_string();
            self.failure = Some(e);
            msg
        })
    }
}

impl ValueHost for Host<'_> {
    fn value(&mut self, _: usize, signal: SignalId, name: &str, _: SignalKind) -> Result<Value, String> {
        if let Some(&s) = self.wiring.marks.get(&signal) {
            return Ok(Value::Range(self.plan(s)?.output));
        }
        if let Some(&s) = self.wiring.acks.get(&signal) {
            let p = self.plan(s)?;
            self.to_compute[s] = true;
            self.acks[s] += 1;
            return Ok(Value::Range(p.input));
        }
        Err(format!("no data-plane binding for {name}"))
    }
}

impl PipelineRun {
    pub fn new(topo: Topology, opts: DrmOptions) -> Result<Self, DrmError> {
        let (program, wiring) = build_program(&topo, &opts)?;
        let n = topo.stages.len();
        let init = wiring
            .order
            .iter()
            .find(|&&i| topo.stages[i].kind == StageKind::Source)
            .map(|&i| SampleRange::new(0, topo.stages[i].out_rate))
            .unwrap_or(SampleRange::new(0, 1));
        Ok(PipelineRun {
            runtimes: topo.stages.iter().cloned().map(StageRuntime::new).collect(),
            connectors: topo.edges.iter().map(|e| Connector::new(e.rate, e.width)).collect(),
            topo,
            opts,
            program,
            wiring,
            init_range: init,
            items: None,
            reactions: Vec::new(),
            log: Vec::new(),
            sink_bytes: vec![Vec::new(); n],
            acks: vec![0; n],
            produced: 0,
            consumed: 0,
        })
    }

    /// Range carried by `InitRange`; it fixes the source frame size.
    pub fn set_init_range(&mut self, r: SampleRange) {
        self.init_range = r;
    }

    /// Caps the number of frames each source produces (needs `avail`).
    pub fn set_items(&mut self, items: Option<u64>) {
        self.items = items;
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn runtime(&self, stage: usize) -> &StageRuntime {
        &self.runtimes[stage]
    }

    pub fn connector(&self, edge: usize) -> &Connector {
        &self.connectors[edge]
    }

    pub fn acks(&self, stage: usize) -> u64 {
        self.acks[stage]
    }

    pub fn sink_output(&self, stage: usize) -> &[u8] {
        &self.sink_bytes[stage]
    }

    pub fn stage_state(&self, stage: usize) -> Option<StageState> {
        self.wiring.automaton[stage].and_then(|a| StageState::parse(self.program.current_state(a)))
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            stages: self.wiring.order.len(),
            ticks: self.reactions.len() as u64,
            produced: self.produced,
            consumed: self.consumed,
        }
    }

    /// Span from the first source compute to the last sink compute, inclusive.
    pub fn drm_ticks(&self) -> Option<u64> {
        let kind = |e: &LogEntry| self.topo.stages[e.stage].kind;
        let live = |e: &&LogEntry| !e.skipped;
        let first = self
            .log
            .iter()
            .filter(live)
            .find(|e| kind(e) == StageKind::Source)?
            .tick;
        let last = self
            .log
            .iter()
            .filter(live)
            .rev()
            .find(|e| kind(e) == StageKind::Sink)?
            .tick;
        Some(last + 1 - first)
    }

    /// One tick with explicit environment inputs.
    pub fn step(&mut self, inputs: &[SignalEvent]) -> Result<Reaction, DrmError> {
        let tick = self.program.tick();
        let mut host = Host {
            wiring: &self.wiring,
            topo: &self.topo,
            runtimes: &mut self.runtimes,
            connectors: &self.connectors,
            init_range: self.init_range,
            to_compute: vec![false; self.topo.stages.len()],
            acks: &mut self.acks,
            failure: None,
        };
        let reaction = match self.program.react_with(inputs, &mut host) {
            Ok(r) => r,
            Err(e) => return Err(host.failure.take().map(DrmError::from).unwrap_or(e.into())),
        };
        let mut to_compute = host.to_compute;
        for ev in &reaction.outputs {
            if let Some(&s) = self.wiring.source_computes.get(&ev.id) {
                to_compute[s] = true;
            }
        }
        for &s in self.wiring.order.clone().iter().rev() {
            if to_compute[s] {
                self.compute_stage(s, tick)?;
            }
        }
        self.reactions.push(reaction.clone());
        Ok(reaction)
    }

    fn compute_stage(&mut self, s: usize, tick: u64) -> Result<(), DrmError> {
        let planned = *self.runtimes[s]
            .pending()
            .ok_or_else(|| DrmError::Desync(self.topo.stages[s].name.clone()))?;
        let in_edge = self.topo.active_in(s);
        let out_edges = self.topo.active_outs(s);
        let mut input = None;
        let mut outputs = Vec::new();
        for (i, c) in self.connectors.iter_mut().enumerate() {
            if Some(i) == in_edge {
                input = Some(c);
            } else if out_edges.contains(&i) {
                outputs.push(c);
            }
        }
        let done = self.runtimes[s].compute(planned, input, &mut outputs)?;
        match self.topo.stages[s].kind {
            StageKind::Source => self.produced += 1,
            StageKind::Sink => {
                self.consumed += 1;
                self.sink_bytes[s].extend_from_slice(&done.sink_bytes);
            }
            StageKind::Intermediate => {}
        }
        self.log.push(LogEntry {
            tick,
            stage: s,
            input: planned.input,
            output: planned.output,
            skipped: false,
        });
        Ok(())
    }

    /// One tick where `ready[i]` drives stage i's availability input.
    pub fn step_pipeline(&mut self, ready: &[bool]) -> Result<Reaction, DrmError> {
        let inputs: Vec<SignalEvent> = self
            .wiring
            .avail
            .iter()
            .zip(ready)
            .filter_map(|(sig, r)| match (sig, r) {
                (Some(id), true) => Some(SignalEvent {
                    id: *id,
                    value: None,
                    tick: self.program.tick(),
                }),
                _ => None,
            })
            .collect();
        self.step(&inputs)
    }

    /// Availability derived from the item cap: sources while frames remain,
    /// every other stage always.
    pub fn auto_ready(&self) -> Vec<bool> {
        (0..self.topo.stages.len())
            .map(|i| {
                if self.topo.stages[i].kind != StageKind::Source {
                    return true;
                }
                let Some(limit) = self.items else { return true };
                let starting = self.stage_state(i).is_some_and(|s| s.phase == Phase::Est) as u64;
                self.runtimes[i].estimates + starting < limit
            })
            .collect()
    }

    /// Ticks 0..=2: reset, `IP_Addr`, `InitRange`.
    pub fn boot(&mut self) -> Result<(), DrmError> {
        let ready = self.auto_ready();
        self.step_pipeline(&ready)?;
        let mut ip = vec![self.program.event(IP_ADDR)?];
        ip.extend(self.avail_events(&self.auto_ready()));
        self.step(&ip)?;
        let mut init = vec![self.program.event_with(INIT_RANGE, Value::Range(self.init_range))?];
        init.extend(self.avail_events(&self.auto_ready()));
        self.step(&init)?;
        Ok(())
    }

    fn avail_events(&self, ready: &[bool]) -> Vec<SignalEvent> {
        self.wiring
            .avail
            .iter()
            .zip(ready)
            .filter_map(|(sig, r)| sig.filter(|_| *r))
            .map(|id| SignalEvent {
                id,
                value: None,
                tick: self.program.tick(),
            })
            .collect()
    }

    /// Boots and runs until every sink has consumed `items` frames.
    pub fn run_items(&mut self, items: u64) -> Result<RunSummary, DrmError> {
        self.items = Some(items);
        if !self.opts.avail {
            return Err(DrmError::NeedsAvailability);
        }
        self.boot()?;
        let sinks: Vec<usize> = self
            .wiring
            .order
            .iter()
            .copied()
            .filter(|&i| self.topo.stages[i].kind == StageKind::Sink)
            .collect();
        let limit = 8 * (self.topo.stages.len() as u64 + items) + 64;
        let mut idle = 0;
        while sinks.iter().any(|&s| self.runtimes[s].computes < items) {
            let before = self.log.len();
            let ready = self.auto_ready();
            self.step_pipeline(&ready)?;
            idle = if self.log.len() == before { idle + 1 } else { 0 };
            if idle > limit {
                return Err(DrmError::Stalled(self.program.tick()));
            }
        }
        Ok(self.summary())
    }

    /// Switches edges off and on while running. Edges are given as
    /// (upstream, downstream) stage names; unknown pairs are connected.
    pub fn retopologize(&mut self, off: &[(&str, &str)], on: &[(&str, &str)]) -> Result<(), DrmError> {
        let find = |t: &Topology, (u, d): (&str, &str)| {
            t.edge_between(u, d).ok_or_else(|| DrmError::BadSwitch {
                from: u.into(),
                to: d.into(),
                reason: "no such edge".into(),
            })
        };
        let off_ids = off
            .iter()
            .map(|p| find(&self.topo, *p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut on_ids = Vec::new();
        for &(u, d) in on {
            let id = match self.topo.edge_between(u, d) {
                Some(id) => id,
                None => self.attach_edge(u, d)?,
            };
            let e = &self.topo.edges[id];
            let (us, ds) = (&self.topo.stages[e.from], &self.topo.stages[e.to]);
            if us.out_rate != ds.in_rate || e.rate != ds.in_rate {
                return Err(DrmError::IncompatibleRates {
                    from: u.into(),
                    to: d.into(),
                    out_rate: us.out_rate,
                    in_rate: ds.in_rate,
                });
            }
            on_ids.push(id);
        }
        if off_ids.iter().all(|&e| !self.topo.edges[e].active) && on_ids.iter().all(|&e| self.topo.edges[e].active) {
            return Ok(());
        }

        let old_topo = self.topo.clone();
        let old_states: Vec<Option<StageState>> = (0..self.topo.stages.len()).map(|i| self.stage_state(i)).collect();
        let old_downs: Vec<Vec<usize>> = (0..self.topo.stages.len())
            .map(|i| {
                old_topo
                    .active_outs(i)
                    .into_iter()
                    .map(|e| old_topo.edges[e].to)
                    .collect()
            })
            .collect();
        let glue_state = self
            .program
            .current_state(self.program.automaton_id(GLUE).expect("glue"))
            .to_string();
        let tick = self.program.tick();

        let mut next = self.topo.clone();
        for &e in &off_ids {
            next.edges[e].active = false;
        }
        for &e in &on_ids {
            next.edges[e].active = true;
        }
        let (program, wiring) = build_program(&next, &self.opts)?;

        // Data on removed edges is dropped; stages fed by them restart.
        let mut reset = vec![false; next.stages.len()];
        for &e in &off_ids {
            let to = next.edges[e].to;
            if next.active_in(to) != old_topo.active_in(to) {
                reset[to] = true;
            }
            let w = self.connectors[e].drain();
            if w.size > 0 {
                self.log.push(LogEntry {
                    tick,
                    stage: to,
                    input: w,
                    output: SampleRange::skip(w.index),
                    skipped: true,
                });
            }
        }
        for (s, r) in reset.iter().enumerate() {
            if *r {
                for input in self.runtimes[s].drop_pending() {
                    self.log.push(LogEntry {
                        tick,
                        stage: s,
                        input,
                        output: SampleRange::skip(input.index),
                        skipped: true,
                    });
                }
            }
        }
        for &e in &on_ids {
            let (u, d) = (next.edges[e].from, next.edges[e].to);
            let mut start = self.runtimes[u].next_push();
            let want = self.runtimes[d].in_cursor();
            if want > start {
                let shared = next.active_outs(u).iter().any(|x| !on_ids.contains(x));
                if shared || !self.runtimes[u].skip_output_to(want) {
                    return Err(DrmError::BadSwitch {
                        from: next.stages[u].name.clone(),
                        to: next.stages[d].name.clone(),
                        reason: "downstream is ahead of the new upstream".into(),
                    });
                }
                start = want;
            }
            self.runtimes[d].skip_input_to(start);
            self.connectors[e] = Connector::new(next.edges[e].rate, next.edges[e].width).starting_at(start);
        }

        let mut program = program;
        for (s, aut) in wiring.automaton.iter().enumerate() {
            let Some(aut) = aut else { continue };
            let downs: Vec<usize> = next.active_outs(s).into_iter().map(|e| next.edges[e].to).collect();
            let state = match &old_states[s] {
                Some(old) if !reset[s] => {
                    let credits = downs
                        .iter()
                        .map(|d| match old_downs[s].iter().position(|x| x == d) {
                            Some(j) => old.credits[j],
                            None => true,
                        })
                        .collect();
                    StageState {
                        phase: old.phase,
                        data: old.data,
                        credits,
                    }
                }
                Some(old) if old.phase == Phase::Off => StageState {
                    phase: Phase::Off,
                    data: false,
                    credits: vec![],
                },
                None if glue_state == "WaitIp" => StageState {
                    phase: Phase::Off,
                    data: false,
                    credits: vec![],
                },
                _ => StageState {
                    phase: Phase::Idle,
                    data: false,
                    credits: vec![true; downs.len()],
                },
            };
            program.set_state(*aut, &state.name())?;
        }
        let glue = program.automaton_id(GLUE).expect("glue");
        program.set_state(glue, &glue_state)?;
        let mut snap = program.snapshot();
        snap.tick = tick;
        program.restore(&snap)?;

        self.topo = next;
        self.program = program;
        self.wiring = wiring;
        Ok(())
    }

    fn attach_edge(&mut self, u: &str, d: &str) -> Result<usize, DrmError> {
        let ui = self
            .topo
            .stage_index(u)
            .ok_or_else(|| DataplaneError::UnknownStage(u.into()))?;
        let di = self
            .topo
            .stage_index(d)
            .ok_or_else(|| DataplaneError::UnknownStage(d.into()))?;
        let (out_rate, in_rate) = (self.topo.stages[ui].out_rate, self.topo.stages[di].in_rate);
        if out_rate != in_rate {
            return Err(DrmError::IncompatibleRates {
                from: u.into(),
                to: d.into(),
                out_rate,
                in_rate,
            });
        }
        let width = self
            .topo
            .edges
            .iter()
            .find(|e| e.from == ui)
            .map(|e| e.width)
            .unwrap_or(1);
        let id = self.topo.connect(u, d, out_rate, width)?;
        self.topo.edges[id].active = false;
        self.connectors.push(Connector::new(out_rate, width));
        Ok(id)
    }

    /// Sink bytes keyed by sink name.
    pub fn outputs(&self) -> HashMap<String, Vec<u8>> {
        self.topo
            .stages
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == StageKind::Sink)
            .map(|(i, s)| (s.name.clone(), self.sink_bytes[i].clone()))
            .collect()
    }
}
