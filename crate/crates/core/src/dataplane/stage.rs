use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use super::{Connector, DataplaneError, SampleRange};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Source,
    Intermediate,
    Sink,
}

/// What a compute function sees besides its input bytes.
#[derive(Clone, Copy, Debug)]
pub struct ComputeCtx {
    pub input: SampleRange,
    pub output: SampleRange,
    /// Ordinal of the frame being processed, counted from 0 per stage.
    pub frame: u64,
    pub in_width: usize,
    pub out_width: usize,
}

pub type ComputeFn = Arc<dyn Fn(&ComputeCtx, &[u8]) -> Result<Vec<u8>, String> + Send + Sync>;

/// A DSP stage: port rates plus its computing function. The estimating
/// function is the fixed frame law implemented by [`StageRuntime::estimate`].
#[derive(Clone)]
pub struct StageDescriptor {
    pub name: String,
    pub kind: StageKind,
    /// Samples consumed per frame; 0 for sources.
    pub in_rate: u64,
    /// Samples produced per frame; 0 for sinks.
    pub out_rate: u64,
    pub in_ports: usize,
    pub out_ports: usize,
    pub compute: ComputeFn,
}

impl fmt::Debug for StageDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StageDescriptor")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("in_rate", &self.in_rate)
            .field("out_rate", &self.out_rate)
            .finish_non_exhaustive()
    }
}

impl StageDescriptor {
    pub fn source(name: impl Into<String>, out_rate: u64, compute: ComputeFn) -> Self {
        StageDescriptor {
            name: name.into(),
            kind: StageKind::Source,
            in_rate: 0,
            out_rate,
            in_ports: 0,
            out_ports: 1,
            compute,
        }
    }

    pub fn intermediate(name: impl Into<String>, in_rate: u64, out_rate: u64, compute: ComputeFn) -> Self {
        StageDescriptor {
            name: name.into(),
            kind: StageKind::Intermediate,
            in_rate,
            out_rate,
            in_ports: 1,
            out_ports: 1,
            compute,
        }
    }

    /// Sinks keep what their compute function returns.
    pub fn sink(name: impl Into<String>, in_rate: u64, compute: ComputeFn) -> Self {
        StageDescriptor {
            name: name.into(),
            kind: StageKind::Sink,
            in_rate,
            out_rate: 0,
            in_ports: 1,
            out_ports: 0,
            compute,
        }
    }

    pub fn with_ports(mut self, in_ports: usize, out_ports: usize) -> Self {
        self.in_ports = in_ports;
        self.out_ports = out_ports;
        self
    }

    /// Identity stage.
    pub fn pass(name: impl Into<String>, rate: u64) -> Self {
        Self::intermediate(name, rate, rate, Arc::new(|_, b| Ok(b.to_vec())))
    }
}

/// An estimated but not yet computed unit of work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Planned {
    pub input: SampleRange,
    pub output: SampleRange,
    pub frame: u64,
}

/// Result of one compute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Computed {
    pub planned: Planned,
    /// Bytes produced; kept only for sinks, empty otherwise.
    pub sink_bytes: Vec<u8>,
}

/// Per-stage cursors and the estimate/compute bookkeeping.
#[derive(Clone, Debug)]
pub struct StageRuntime {
    pub desc: StageDescriptor,
    in_cursor: u64,
    out_cursor: u64,
    last_source: Option<SampleRange>,
    pending: VecDeque<Planned>,
    frames: u64,
    pub estimates: u64,
    pub computes: u64,
    /// Every planned input range that reached compute, in order.
    pub computed_inputs: Vec<SampleRange>,
}

impl StageRuntime {
    pub fn new(desc: StageDescriptor) -> Self {
        StageRuntime {
            desc,
            in_cursor: 0,
            out_cursor: 0,
            last_source: None,
            pending: VecDeque::new(),
            frames: 0,
            estimates: 0,
            computes: 0,
            computed_inputs: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.desc.name
    }

    pub fn pending(&self) -> Option<&Planned> {
        self.pending.front()
    }

    pub fn out_cursor(&self) -> u64 {
        self.out_cursor
    }

    pub fn in_cursor(&self) -> u64 {
        self.in_cursor
    }

    /// Ordinal at which this stage's next output will start.
    pub fn next_push(&self) -> u64 {
        self.pending.front().map(|p| p.output.index).unwrap_or(self.out_cursor)
    }

    /// Moves the output cursor forward; only allowed with nothing pending.
    pub fn skip_output_to(&mut self, ordinal: u64) -> bool {
        if !self.pending.is_empty() || ordinal < self.out_cursor {
            return false;
        }
        self.out_cursor = ordinal;
        true
    }

    /// Moves the input cursor past samples that will never reach this stage.
    pub fn skip_input_to(&mut self, ordinal: u64) {
        self.in_cursor = self.in_cursor.max(ordinal);
    }

    /// Plans the next frame from the upstream window.
    ///
    /// For sources `upstream` is the injected range: the first one fixes the
    /// frame size and later calls continue contiguously from it.
    pub fn estimate(&mut self, upstream: SampleRange) -> Result<Planned, DataplaneError> {
        let planned = match self.desc.kind {
            StageKind::Source => {
                let output = match self.last_source {
                    None => {
                        if upstream.size == 0 {
                            return Err(self.insufficient(1, 0));
                        }
                        upstream
                    }
                    Some(prev) => prev.next(),
                };
                self.last_source = Some(output);
                Planned {
                    input: output,
                    output,
                    frame: self.frames,
                }
            }
            _ => {
                let need = self.desc.in_rate;
                let have = if upstream.index > self.in_cursor || upstream.end() <= self.in_cursor {
                    0
                } else {
                    upstream.end() - self.in_cursor
                };
                if have < need || need == 0 {
                    return Err(self.insufficient(need, have));
                }
                let input = SampleRange::new(self.in_cursor, need);
                let out_size = if self.desc.kind == StageKind::Sink {
                    need
                } else {
                    self.desc.out_rate
                };
                let output = SampleRange::new(self.out_cursor, out_size);
                self.in_cursor = input.end();
                Planned {
                    input,
                    output,
                    frame: self.frames,
                }
            }
        };
        self.out_cursor = planned.output.end();
        self.frames += 1;
        self.estimates += 1;
        self.pending.push_back(planned);
        Ok(planned)
    }

    fn insufficient(&self, need: u64, have: u64) -> DataplaneError {
        DataplaneError::InsufficientData {
            stage: self.desc.name.clone(),
            need,
            have,
        }
    }

    /// Runs the compute function on a planned frame: input bytes are consumed
    /// from `input`, output bytes appended to every connector in `outputs`.
    pub fn compute(
        &mut self,
        planned: Planned,
        input: Option<&mut Connector>,
        outputs: &mut [&mut Connector],
    ) -> Result<Computed, DataplaneError> {
        if self.pending.front() != Some(&planned) {
            return Err(DataplaneError::StaleRange {
                stage: self.desc.name.clone(),
                range: planned.input,
            });
        }
        let is_sink = self.desc.kind == StageKind::Sink;
        for c in outputs.iter() {
            if planned.output.size > c.free() {
                return Err(DataplaneError::BufferOverrun {
                    need: planned.output.size,
                    free: c.free(),
                });
            }
        }
        let (bytes, in_width) = match input.as_deref() {
            Some(c) => (c.peek(planned.input).map_err(|e| e.at(&self.desc.name))?, c.width),
            None => (Vec::new(), 0),
        };
        let out_width = outputs.first().map(|c| c.width).unwrap_or(in_width);
        let ctx = ComputeCtx {
            input: planned.input,
            output: planned.output,
            frame: planned.frame,
            in_width,
            out_width,
        };
        let out = (self.desc.compute)(&ctx, &bytes).map_err(|reason| DataplaneError::ComputeFailed {
            stage: self.desc.name.clone(),
            reason,
        })?;
        if !is_sink && out.len() != planned.output.size as usize * out_width {
            return Err(DataplaneError::OutputLength {
                stage: self.desc.name.clone(),
                expected: planned.output.size as usize * out_width,
                got: out.len(),
            });
        }
        for c in outputs.iter_mut() {
            c.push(planned.output, &out).map_err(|e| e.at(&self.desc.name))?;
        }
        if let Some(c) = input {
            c.pop(planned.input).map_err(|e| e.at(&self.desc.name))?;
        }
        self.pending.pop_front();
        self.computes += 1;
        self.computed_inputs.push(planned.input);
        Ok(Computed {
            planned,
            sink_bytes: if is_sink { out } else { Vec::new() },
        })
    }

    /// Discards planned frames; returns their input ranges.
    pub fn drop_pending(&mut self) -> Vec<SampleRange> {
        self.pending.drain(..).map(|p| p.input).collect()
    }
}

/// Checks the rates of both ends and allocates the connector between them.
pub fn connect(
    up: &StageDescriptor,
    down: &StageDescriptor,
    rate: u64,
    width: usize,
) -> Result<Connector, DataplaneError> {
    if up.out_ports == 0 || down.in_ports == 0 {
        return Err(DataplaneError::PortAlreadyBound {
            stage: if up.out_ports == 0 {
                up.name.clone()
            } else {
                down.name.clone()
            },
        });
    }
    if width == 0 || rate == 0 {
        return Err(DataplaneError::Config(format!(
            "edge {} -> {}: rate and width must be positive",
            up.name, down.name
        )));
    }
    for (stage, declared) in [(&up.name, up.out_rate), (&down.name, down.in_rate)] {
        if declared != rate {
            return Err(DataplaneError::RateMismatch {
                stage: stage.clone(),
                declared,
                connector: rate,
            });
        }
    }
    Ok(Connector::new(rate, width))
}
