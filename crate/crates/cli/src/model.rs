use std::path::Path;
use std::sync::Arc;

use syncdsp::dataplane::{SampleRange, StageKind, Topology, TopologyConfig};
use syncdsp::drm::{build_program, DrmBug, DrmMode, DrmOptions};
use syncdsp::gsm::{stage_from_config, OpEnv};
use syncdsp::kernel::Program;
use syncdsp::verify::{compose, drm_alphabet, standard_observers, Letter};

use crate::config::Bug;
use crate::Failure;

pub fn read_topology(path: &Path) -> Result<TopologyConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read topology {}: {e}", path.display())))?;
    TopologyConfig::from_toml(&text).map_err(|e| Failure::usage(format!("topology {}: {e}", path.display())))
}

pub fn build(cfg: &TopologyConfig, input: Vec<u8>, key: u64) -> Result<Topology, Failure> {
    let env = OpEnv {
        input: Arc::new(input),
        key,
    };
    Topology::from_config(cfg, &|s| stage_from_config(s, &env)).map_err(|e| Failure::usage(e.to_string()))
}

pub fn source(topo: &Topology) -> Result<usize, Failure> {
    topo.stages
        .iter()
        .position(|s| s.kind == StageKind::Source)
        .ok_or_else(|| Failure::usage("topology has no source stage"))
}

/// Bytes per source frame.
pub fn frame_bytes(topo: &Topology) -> Result<usize, Failure> {
    let s = source(topo)?;
    let width = topo.edges.iter().find(|e| e.from == s).map(|e| e.width).unwrap_or(1);
    Ok(topo.stages[s].out_rate as usize * width)
}

/// Which observers to attach, parsed from a list such as `s1,s3`.
pub fn parse_observers(list: &str) -> Result<[bool; 3], Failure> {
    let mut on = [false; 3];
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.to_ascii_lowercase().as_str() {
            "s1" => on[0] = true,
            "s2" => on[1] = true,
            "s3" => on[2] = true,
            "all" => on = [true; 3],
            other => return Err(Failure::usage(format!("unknown observer `{other}`"))),
        }
    }
    if on == [false; 3] {
        return Err(Failure::usage("no observers selected"));
    }
    Ok(on)
}

pub fn drm_bug(bug: Option<Bug>, stage: Option<&str>, topo: &Topology) -> Result<Option<DrmBug>, Failure> {
    let Some(bug) = bug else { return Ok(None) };
    let order = topo.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let default = order
        .iter()
        .map(|&i| &topo.stages[i])
        .find(|s| s.kind == StageKind::Intermediate);
    let stage = match stage {
        Some(s) if topo.stage_index(s).is_some() => s.to_string(),
        Some(s) => return Err(Failure::usage(format!("unknown stage `{s}`"))),
        None => default
            .map(|s| s.name.clone())
            .ok_or_else(|| Failure::usage("no intermediate stage"))?,
    };
    Ok(Some(match bug {
        Bug::EarlyAck => DrmBug::EarlyAck(stage),
        Bug::DroppedCancel => DrmBug::DroppedCancel(stage),
        Bug::MissingSinkAck => DrmBug::MissingSinkAck,
    }))
}

/// The control program of `topo` with the selected observers.
pub struct Model {
    pub program: Program,
    pub alphabet: Vec<Letter>,
    pub signals: Vec<&'static str>,
}

pub const VIOLATION: [&str; 3] = [
    syncdsp::verify::S1_VIOLATED,
    syncdsp::verify::S2_VIOLATED,
    syncdsp::verify::S3_VIOLATED,
];

pub fn verify_model(topo: &Topology, bug: Option<DrmBug>, on: [bool; 3], bound: u32) -> Result<Model, Failure> {
    let opts = DrmOptions {
        mode: DrmMode::TwoTick,
        avail: false,
        bug,
    };
    let (p, _) = build_program(topo, &opts).map_err(|e| Failure::usage(e.to_string()))?;
    let all = standard_observers(&p, topo, bound).map_err(|e| Failure::usage(e.to_string()))?;
    let chosen: Vec<_> = all.into_iter().zip(on).filter(|(_, o)| *o).map(|(s, _)| s).collect();
    let program = compose(&p, &chosen).map_err(|e| Failure::usage(e.to_string()))?;
    let src = source(topo)?;
    Ok(Model {
        program,
        alphabet: drm_alphabet(SampleRange::new(0, topo.stages[src].out_rate)),
        signals: VIOLATION.iter().zip(on).filter(|(_, o)| *o).map(|(s, _)| *s).collect(),
    })
}
