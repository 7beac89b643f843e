use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use syncdsp::dataplane::{EdgeConfig, StageConfig, StageKind, Topology, TopologyConfig};
use syncdsp::dpm::{compare_schedulers, DpmRun};
use syncdsp::drm::{DrmMode, DrmOptions, PipelineRun};
use syncdsp::kernel::{ConstHost, SignalEvent};
use syncdsp::verify::{check_emission, extract_fsm, minimize, EmissionStatus, ExtractOptions, Letter, VerifyError};

use crate::config::{FileConfig, Mode, RunConfig, Scheduler};
use crate::model::{self, parse_observers, verify_model};
use crate::Failure;

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn sinks(topo: &Topology) -> Vec<usize> {
    let order = topo.validate().unwrap_or_default();
    order
        .into_iter()
        .filter(|&i| topo.stages[i].kind == StageKind::Sink)
        .collect()
}

struct Outcome {
    ticks: u64,
    trace: Vec<String>,
    output: Vec<u8>,
    produced: u64,
    consumed: u64,
}

fn run_drm(topo: Topology, mode: Mode, items: Option<u64>, limit: u64) -> Result<Outcome, Failure> {
    let mode = match mode {
        Mode::TwoTick => DrmMode::TwoTick,
        Mode::Fast => DrmMode::Fast,
    };
    let sinks = sinks(&topo);
    let mut run = PipelineRun::new(
        topo,
        DrmOptions {
            mode,
            avail: true,
            bug: None,
        },
    )
    .map_err(Failure::runtime)?;
    run.set_items(items);
    if limit < 3 {
        return Err(Failure::usage("the reactive scheduler needs at least 3 ticks to boot"));
    }
    run.boot().map_err(Failure::runtime)?;
    let done = |r: &PipelineRun| items.is_some_and(|k| sinks.iter().all(|&s| r.runtime(s).computes >= k));
    while (run.reactions.len() as u64) < limit && !done(&run) {
        let ready = run.auto_ready();
        run.step_pipeline(&ready).map_err(Failure::runtime)?;
    }
    let trace = run.reactions.iter().map(|r| r.trace_line(run.program())).collect();
    let s = run.summary();
    Ok(Outcome {
        ticks: s.ticks,
        trace,
        output: sinks.iter().flat_map(|&k| run.sink_output(k).to_vec()).collect(),
        produced: s.produced,
        consumed: s.consumed,
    })
}

fn run_dpm(topo: Topology, items: Option<u64>, limit: u64) -> Result<Outcome, Failure> {
    let mut run = DpmRun::new(topo).map_err(Failure::runtime)?;
    run.set_items(items);
    let sinks = run.sinks();
    'outer: while run.ticks() < limit {
        for &s in &sinks {
            if items.is_some_and(|k| run.runtime(s).computes >= k) {
                break 'outer;
            }
            let want = run.next_want(s);
            run.pull(s, want).map_err(Failure::runtime)?;
        }
    }
    let topo = run.topology();
    let trace = run
        .log
        .iter()
        .map(|e| {
            format!(
                "tick={} stage={} in={} out={}",
                e.tick, topo.stages[e.stage].name, e.input, e.output
            )
        })
        .collect();
    let count = |k: StageKind| run.log.iter().filter(|e| topo.stages[e.stage].kind == k).count() as u64;
    Ok(Outcome {
        ticks: run.ticks(),
        produced: count(StageKind::Source),
        consumed: count(StageKind::Sink),
        trace,
        output: sinks.iter().flat_map(|&s| run.sink_output(s)).collect(),
    })
}

pub fn run(c: &FileConfig) -> Result<(), Failure> {
    let rc = RunConfig::resolve(c)?;
    let cfg = model::read_topology(&rc.topology)?;
    let input = match &rc.input {
        Some(p) => fs::read(p).map_err(|e| Failure::usage(format!("cannot read input {}: {e}", p.display())))?,
        None => Vec::new(),
    };
    let topo = model::build(&cfg, input.clone(), rc.seed)?;
    let fb = model::frame_bytes(&topo)?.max(1);
    let items = c.items.or(rc.input.as_ref().map(|_| input.len().div_ceil(fb) as u64));
    let out = match rc.scheduler {
        Scheduler::Drm => run_drm(topo, rc.mode, items, rc.ticks)?,
        Scheduler::Dpm => run_dpm(topo, items, rc.ticks)?,
    };
    if let Some(p) = &rc.output {
        write(p, &out.output)?;
    }
    if let Some(p) = &rc.trace {
        let mut text = out.trace.join("\n");
        text.push('\n');
        write(p, text.as_bytes())?;
    }
    let scheduler = match rc.scheduler {
        Scheduler::Drm => "drm",
        Scheduler::Dpm => "dpm",
    };
    if rc.json {
        let rec = json!({
            "scheduler": scheduler,
            "ticks": out.ticks,
            "produced": out.produced,
            "consumed": out.consumed,
            "output_bytes": out.output.len(),
        });
        println!("{rec}");
    } else {
        println!(
            "scheduler={scheduler} ticks={} produced={} consumed={} output_bytes={}",
            out.ticks,
            out.produced,
            out.consumed,
            out.output.len()
        );
    }
    Ok(())
}

/// Witness file written by `verify` and read by `replay`.
#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub fingerprint: u64,
    pub observers: String,
    pub bound: u32,
    pub signal: String,
    pub letters: Vec<Letter>,
}

fn observer_list(on: [bool; 3]) -> String {
    ["s1", "s2", "s3"]
        .iter()
        .zip(on)
        .filter(|(_, o)| *o)
        .map(|(s, _)| *s)
        .collect::<Vec<_>>()
        .join(",")
}

fn topology_of(c: &FileConfig) -> Result<Topology, Failure> {
    let path = c
        .topology
        .clone()
        .ok_or_else(|| Failure::usage("--topology is required"))?;
    model::build(&model::read_topology(&path)?, Vec::new(), c.seed.unwrap_or(0))
}

pub fn verify(c: &FileConfig) -> Result<(), Failure> {
    let topo = topology_of(c)?;
    let on = parse_observers(c.observers.as_deref().unwrap_or("s1,s2,s3"))?;
    let bound = c.bound.unwrap_or(14);
    let bug = model::drm_bug(c.bug, c.bug_stage.as_deref(), &topo)?;
    let m = verify_model(&topo, bug, on, bound)?;
    let opts = ExtractOptions {
        max_states: c.max_states.unwrap_or(ExtractOptions::default().max_states),
        workers: c.workers.unwrap_or(1),
    };
    let fsm = extract_fsm(&m.program, &m.alphabet, &opts).map_err(|e| match e {
        VerifyError::StateExplosion { .. } => Failure {
            code: Failure::EXPLOSION,
            msg: e.to_string(),
        },
        e => Failure::runtime(e),
    })?;
    if let Some(p) = &c.export_fsm {
        write(p, fsm.to_text().as_bytes())?;
    }
    let minimal = minimize(&fsm).state_count();
    let verdicts = m
        .signals
        .iter()
        .map(|s| check_emission(&fsm, s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::runtime)?;
    let failed = verdicts.iter().find(|v| v.status == EmissionStatus::PossiblyEmitted);
    let witness_path = c.witness.clone().unwrap_or_else(|| PathBuf::from("witness.json"));
    if let Some(v) = failed {
        let w = WitnessFile {
            fingerprint: m.program.fingerprint(),
            observers: observer_list(on),
            bound,
            signal: v.signal.clone(),
            letters: v.witness.clone().unwrap_or_default(),
        };
        let text = serde_json::to_string_pretty(&w).map_err(Failure::runtime)?;
        write(&witness_path, text.as_bytes())?;
    }
    if c.json.unwrap_or(false) {
        let rec = json!({
            "states": fsm.state_count(),
            "transitions": fsm.transition_count(),
            "minimized_states": minimal,
            "bound": bound,
            "verdicts": verdicts,
            "witness_file": failed.map(|_| witness_path.display().to_string()),
        });
        println!("{rec}");
    } else {
        println!(
            "states={} transitions={} minimized={minimal} bound={bound}",
            fsm.state_count(),
            fsm.transition_count()
        );
        for v in &verdicts {
            match v.status {
                EmissionStatus::NeverEmitted => println!("{} never-emitted", v.signal),
                EmissionStatus::PossiblyEmitted => println!(
                    "{} possibly-emitted witness={} ticks",
                    v.signal,
                    v.witness.as_ref().map_or(0, Vec::len)
                ),
            }
        }
        if failed.is_some() {
            println!("witness written to {}", witness_path.display());
        }
    }
    match failed {
        Some(_) => Err(Failure {
            code: Failure::VIOLATION,
            msg: String::new(),
        }),
        None => Ok(()),
    }
}

pub fn replay(c: &FileConfig, force: bool) -> Result<(), Failure> {
    let path = c
        .witness
        .clone()
        .ok_or_else(|| Failure::usage("--witness is required"))?;
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::usage(format!("cannot read witness {}: {e}", path.display())))?;
    let w: WitnessFile =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("witness {}: {e}", path.display())))?;
    let topo = topology_of(c)?;
    let bug = model::drm_bug(c.bug, c.bug_stage.as_deref(), &topo)?;
    let m = verify_model(&topo, bug, parse_observers(&w.observers)?, w.bound)?;
    let json = c.json.unwrap_or(false);
    if m.program.fingerprint() != w.fingerprint {
        let msg = format!(
            "WitnessMismatch: model fingerprint {:016x}, witness recorded {:016x}",
            m.program.fingerprint(),
            w.fingerprint
        );
        if !force {
            return Err(Failure::runtime(msg));
        }
        println!("{msg}");
    }
    let mut p = m.program.clone();
    let id = p
        .signal_id(&w.signal)
        .ok_or_else(|| Failure::runtime(format!("unknown signal {}", w.signal)))?;
    // an empty witness still shows the first reaction
    let letters = if w.letters.is_empty() {
        vec![Vec::new()]
    } else {
        w.letters.clone()
    };
    let mut violated = false;
    for l in &letters {
        let ev = l
            .iter()
            .map(|(n, v)| match v {
                None => p.event(n),
                Some(v) => p.event_with(n, *v),
            })
            .collect::<Result<Vec<SignalEvent>, _>>()
            .map_err(Failure::runtime)?;
        let r = p.react_with(&ev, &mut ConstHost).map_err(Failure::runtime)?;
        violated = r.emitted(id);
        let line = r.trace_line(&p);
        if json {
            println!("{}", json!({ "tick": r.tick, "trace": line, "violation": violated }));
        } else if violated {
            println!("{line}  <- {}", w.signal);
        } else {
            println!("{line}");
        }
    }
    if violated {
        if !json {
            println!("violation {} reproduced at tick {}", w.signal, letters.len() - 1);
        }
        Err(Failure {
            code: Failure::VIOLATION,
            msg: String::new(),
        })
    } else {
        if !json {
            println!("no violation: {} not emitted at the final tick", w.signal);
        }
        Ok(())
    }
}

fn copy_chain(n: usize) -> TopologyConfig {
    let rate = 4;
    let stage = |name: String, op: &str, in_rate, out_rate| StageConfig {
        name,
        op: op.into(),
        in_rate,
        out_rate,
        in_ports: None,
        out_ports: None,
        params: [("width".to_string(), toml::Value::Integer(1))].into_iter().collect(),
    };
    let mut stages = vec![stage("s0".into(), "silence_source", 0, rate)];
    stages.extend((1..n - 1).map(|i| stage(format!("s{i}"), "pass", rate, rate)));
    stages.push(stage(format!("s{}", n - 1), "file_sink", rate, 0));
    let edge = (1..n)
        .map(|i| EdgeConfig {
            from: format!("s{}", i - 1),
            to: format!("s{i}"),
            rate,
            width: 1,
            active: true,
        })
        .collect();
    TopologyConfig { stage: stages, edge }
}

pub fn bench(c: &FileConfig, stages: usize) -> Result<(), Failure> {
    let items = c.items.unwrap_or(100);
    if items == 0 {
        return Err(Failure::usage("--items must be positive"));
    }
    let topo = match &c.topology {
        Some(p) => {
            let cfg = model::read_topology(p)?;
            let probe = model::build(&cfg, Vec::new(), 0)?;
            let bytes = model::frame_bytes(&probe)? * items as usize;
            model::build(&cfg, vec![0; bytes], c.seed.unwrap_or(0))?
        }
        None if stages >= 2 => model::build(&copy_chain(stages), Vec::new(), 0)?,
        None => return Err(Failure::usage("--stages must be at least 2")),
    };
    let r = compare_schedulers(&topo, items).map_err(Failure::runtime)?;
    let speedup = r.dpm_ticks as f64 / r.drm_ticks.max(1) as f64;
    if c.json.unwrap_or(false) {
        let rec = json!({
            "stages": topo.stages.len(),
            "items": items,
            "dpm_ticks": r.dpm_ticks,
            "drm_ticks": r.drm_ticks,
            "speedup": speedup,
        });
        println!("{rec}");
    } else {
        println!(
            "stages={} items={items} dpm_ticks={} drm_ticks={} speedup={speedup:.2}",
            topo.stages.len(),
            r.dpm_ticks,
            r.drm_ticks
        );
    }
    Ok(())
}
