//! Data-pull scheduling: sinks demand frames and each demand recursively
//! pulls the upstream frames it needs, one stage compute per tick.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dataplane::{Connector, DataplaneError, SampleRange, StageKind, StageRuntime, Topology};
use crate::drm::{DrmError, DrmMode, DrmOptions, LogEntry, PipelineRun};

/// A demand travelling upstream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PullRequest {
    pub requester: usize,
    pub range: SampleRange,
    pub depth: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DpmError {
    #[error(transparent)]
    Dataplane(#[from] DataplaneError),
    #[error(transparent)]
    Drm(#[from] DrmError),
    #[error("stage `{0}` is not a sink")]
    NotASink(String),
    #[error("sink `{sink}` received different bytes under the two schedulers")]
    OutputDivergence { sink: String },
}

pub struct DpmRun {
    topo: Topology,
    order: Vec<usize>,
    runtimes: Vec<StageRuntime>,
    connectors: Vec<Connector>,
    init_range: SampleRange,
    items: Option<u64>,
    /// Sink frames already delivered, by input range.
    delivered: Vec<BTreeMap<u64, (SampleRange, Vec<u8>)>>,
    ticks: u64,
    pub log: Vec<LogEntry>,
    pub requests: Vec<PullRequest>,
}

impl DpmRun {
    pub fn new(topo: Topology) -> Result<Self, DpmError> {
        let order = topo.validate()?;
        let init = order
            .iter()
            .find(|&&i| topo.stages[i].kind == StageKind::Source)
            .map(|&i| SampleRange::new(0, topo.stages[i].out_rate))
            .unwrap_or(SampleRange::new(0, 1));
        Ok(DpmRun {
            runtimes: topo.stages.iter().cloned().map(StageRuntime::new).collect(),
            connectors: topo.edges.iter().map(|e| Connector::new(e.rate, e.width)).collect(),
            delivered: vec![BTreeMap::new(); topo.stages.len()],
            order,
            topo,
            init_range: init,
            items: None,
            ticks: 0,
            log: Vec::new(),
            requests: Vec::new(),
        })
    }

    pub fn set_init_range(&mut self, r: SampleRange) {
        self.init_range = r;
    }

    /// Frames each source can produce before it reports exhaustion.
    pub fn set_items(&mut self, items: Option<u64>) {
        self.items = items;
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn runtime(&self, stage: usize) -> &StageRuntime {
        &self.runtimes[stage]
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn sinks(&self) -> Vec<usize> {
        self.order
            .iter()
            .copied()
            .filter(|&i| self.topo.stages[i].kind == StageKind::Sink && self.topo.active_in(i).is_some())
            .collect()
    }

    /// Next frame a sink would consume.
    pub fn next_want(&self, sink: usize) -> SampleRange {
        SampleRange::new(self.runtimes[sink].in_cursor(), self.topo.stages[sink].in_rate)
    }

    /// Delivers the sink bytes of every frame overlapping `want`, pulling
    /// upstream as needed. Frames delivered before are served from cache.
    pub fn pull(&mut self, sink: usize, want: SampleRange) -> Result<Vec<u8>, DpmError> {
        if self.topo.stages[sink].kind != StageKind::Sink {
            return Err(DpmError::NotASink(self.topo.stages[sink].name.clone()));
        }
        while self.runtimes[sink].in_cursor() < want.end() {
            self.produce(sink, 0)?;
        }
        Ok(self.delivered[sink]
            .values()
            .filter(|(r, _)| r.overlaps(&want))
            .flat_map(|(_, b)| b.iter().copied())
            .collect())
    }

    /// Makes `stage` compute one frame, pulling its input first.
    fn produce(&mut self, stage: usize, depth: usize) -> Result<(), DpmError> {
        let desc = &self.topo.stages[stage];
        let in_edge = self.topo.active_in(stage);
        let upstream = match in_edge {
            None => {
                if self.items.is_some_and(|k| self.runtimes[stage].computes >= k) {
                    return Err(DataplaneError::InsufficientData {
                        stage: desc.name.clone(),
                        need: desc.out_rate,
                        have: 0,
                    }
                    .into());
                }
                self.init_range
            }
            Some(e) => {
                let need = SampleRange::new(self.runtimes[stage].in_cursor(), desc.in_rate);
                while self.connectors[e].write_cursor() < need.end() {
                    let up = self.topo.edges[e].from;
                    self.requests.push(PullRequest {
                        requester: stage,
                        range: need,
                        depth: depth + 1,
                    });
                    self.produce(up, depth + 1)?;
                }
                self.connectors[e].window()
            }
        };
        let planned = self.runtimes[stage].estimate(upstream)?;
        let outs = self.topo.active_outs(stage);
        let mut input = None;
        let mut outputs = Vec::new();
        for (i, c) in self.connectors.iter_mut().enumerate() {
            if Some(i) == in_edge {
                input = Some(c);
            } else if outs.contains(&i) {
                outputs.push(c);
            }
        }
        let done = self.runtimes[stage].compute(planned, input, &mut outputs)?;
        if self.topo.stages[stage].kind == StageKind::Sink {
            self.delivered[stage].insert(planned.input.index, (planned.input, done.sink_bytes));
        }
        self.log.push(LogEntry {
            tick: self.ticks,
            stage,
            input: planned.input,
            output: planned.output,
            skipped: false,
        });
        self.ticks += 1;
        Ok(())
    }

    /// Pulls `items` frames through every sink, visiting sinks round-robin.
    pub fn run_items(&mut self, items: u64) -> Result<u64, DpmError> {
        self.items = Some(items);
        let sinks = self.sinks();
        for _ in 0..items {
            for &s in &sinks {
                let want = self.next_want(s);
                self.pull(s, want)?;
            }
        }
        Ok(self.ticks)
    }

    pub fn sink_output(&self, sink: usize) -> Vec<u8> {
        self.delivered[sink]
            .values()
            .flat_map(|(_, b)| b.iter().copied())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchedulerReport {
    pub dpm_ticks: u64,
    pub drm_ticks: u64,
}

/// Runs `items` frames under both schedulers with unit-cost stages and checks
/// that every sink receives identical bytes.
pub fn compare_schedulers(topo: &Topology, items: u64) -> Result<SchedulerReport, DpmError> {
    let mut dpm = DpmRun::new(topo.clone())?;
    let dpm_ticks = dpm.run_items(items)?;
    let mut drm = PipelineRun::new(
        topo.clone(),
        DrmOptions {
            mode: DrmMode::Fast,
            avail: true,
            bug: None,
        },
    )?;
    drm.run_items(items)?;
    for s in dpm.sinks() {
        if dpm.sink_output(s) != drm.sink_output(s) {
            return Err(DpmError::OutputDivergence {
                sink: topo.stages[s].name.clone(),
            });
        }
    }
    Ok(SchedulerReport {
        dpm_ticks,
        drm_ticks: drm.drm_ticks().unwrap_or(0),
    })
}
