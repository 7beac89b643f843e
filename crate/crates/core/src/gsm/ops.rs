use std::collections::BTreeMap;
use std::sync::Arc;

use super::*;
use crate::dataplane::{
    ComputeCtx, ComputeFn, DataplaneError, EdgeConfig, StageConfig, StageDescriptor, Topology, TopologyConfig,
};

/// What stage builders need from the outside.
#[derive(Clone, Debug, Default)]
pub struct OpEnv {
    /// Bytes served by `file_source` stages.
    pub input: Arc<Vec<u8>>,
    /// Cipher key used when a stage has no `key` parameter.
    pub key: u64,
}

/// Operation names accepted in the `op` field of a stage.
pub const OPS: [&str; 14] = [
    "file_source",
    "file_sink",
    "pass",
    "speech_encode",
    "speech_decode",
    "channel_encode",
    "channel_decode",
    "interleave",
    "deinterleave",
    "cipher",
    "decipher",
    "gmsk_modulate",
    "gmsk_demodulate",
    "silence_source",
];

fn param_u64(cfg: &StageConfig, name: &str, default: u64) -> Result<u64, String> {
    match cfg.params.get(name) {
        None => Ok(default),
        Some(toml::Value::Integer(v)) if *v >= 0 => Ok(*v as u64),
        Some(v) => Err(format!("parameter `{name}` must be a non-negative integer, got {v}")),
    }
}

fn param_f64(cfg: &StageConfig, name: &str, default: f64) -> Result<f64, String> {
    match cfg.params.get(name) {
        None => Ok(default),
        Some(toml::Value::Float(v)) => Ok(*v),
        Some(toml::Value::Integer(v)) => Ok(*v as f64),
        Some(v) => Err(format!("parameter `{name}` must be a number, got {v}")),
    }
}

/// Configured rate, defaulting to the op's natural one.
fn rate(declared: u64, natural: u64, what: &str) -> Result<u64, String> {
    match declared {
        0 => Ok(natural),
        r if r == natural => Ok(r),
        r => Err(format!("{what} must be {natural}, got {r}")),
    }
}

fn gmsk_of(cfg: &StageConfig) -> Result<Gmsk, String> {
    let g = Gmsk {
        sps: param_u64(cfg, "sps", 8)? as usize,
        bt: param_f64(cfg, "bt", 0.3)?,
        ..Gmsk::default()
    };
    if g.sps < 4 {
        return Err(GsmError::BadOversampling(g.sps).to_string());
    }
    Ok(g)
}

fn pcm_from_bytes(b: &[u8]) -> Vec<i16> {
    b.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect()
}

fn pcm_to_bytes(pcm: &[i16]) -> Vec<u8> {
    pcm.iter().flat_map(|s| s.to_le_bytes()).collect()
}

fn stream_cipher(key: u64) -> ComputeFn {
    Arc::new(move |c: &ComputeCtx, b: &[u8]| {
        let frame = c.input.index / c.input.size.max(1);
        let mut out = Vec::with_capacity(b.len());
        for (k, burst) in b.chunks(BURST_BITS).enumerate() {
            let ks = keystream(key, frame, k as u64, burst.len());
            out.extend(cipher(burst, &ks).map_err(|e| e.to_string())?);
        }
        Ok(out)
    })
}

fn lift(f: impl Fn(&[u8]) -> Result<Vec<u8>, GsmError> + Send + Sync + 'static) -> ComputeFn {
    Arc::new(move |_: &ComputeCtx, b: &[u8]| f(b).map_err(|e| e.to_string()))
}

/// Builds the stage named by `cfg.op`.
pub fn stage_from_config(cfg: &StageConfig, env: &OpEnv) -> Result<StageDescriptor, String> {
    let name = cfg.name.clone();
    let (sb, cb) = (SPEECH_BITS as u64, CODED_BITS as u64);
    let frame_in = |nat: u64| rate(cfg.in_rate, nat, "in_rate");
    let frame_out = |nat: u64| rate(cfg.out_rate, nat, "out_rate");
    let mid = |i: u64, o: u64, f: ComputeFn| -> Result<StageDescriptor, String> {
        Ok(StageDescriptor::intermediate(
            name.clone(),
            frame_in(i)?,
            frame_out(o)?,
            f,
        ))
    };
    match cfg.op.as_str() {
        "file_source" => {
            let width = param_u64(cfg, "width", 2)? as usize;
            let out = if cfg.out_rate == 0 {
                FRAME_SAMPLES as u64
            } else {
                cfg.out_rate
            };
            let data = env.input.clone();
            Ok(StageDescriptor::source(
                name,
                out,
                Arc::new(move |c: &ComputeCtx, _: &[u8]| {
                    let start = c.output.index as usize * width;
                    if start >= data.len() {
                        return Err(format!("end of stream at sample {}", c.output.index));
                    }
                    let mut v = vec![0u8; c.output.size as usize * width];
                    let end = (start + v.len()).min(data.len());
                    v[..end - start].copy_from_slice(&data[start..end]);
                    Ok(v)
                }),
            ))
        }
        "silence_source" => {
            let width = param_u64(cfg, "width", 2)? as usize;
            let out = if cfg.out_rate == 0 {
                FRAME_SAMPLES as u64
            } else {
                cfg.out_rate
            };
            Ok(StageDescriptor::source(
                name,
                out,
                Arc::new(move |c: &ComputeCtx, _: &[u8]| Ok(vec![0u8; c.output.size as usize * width])),
            ))
        }
        "file_sink" => {
            if cfg.in_rate == 0 {
                return Err("in_rate is required".into());
            }
            Ok(StageDescriptor::sink(
                name,
                cfg.in_rate,
                Arc::new(|_: &ComputeCtx, b: &[u8]| Ok(b.to_vec())),
            ))
        }
        "pass" => {
            if cfg.in_rate == 0 || cfg.in_rate != cfg.out_rate {
                return Err("pass needs in_rate = out_rate > 0".into());
            }
            Ok(StageDescriptor::intermediate(
                name,
                cfg.in_rate,
                cfg.out_rate,
                Arc::new(|_: &ComputeCtx, b: &[u8]| Ok(b.to_vec())),
            ))
        }
        "speech_encode" => mid(FRAME_SAMPLES as u64, sb, lift(|b| speech_encode(&pcm_from_bytes(b)))),
        "speech_decode" => mid(
            sb,
            FRAME_SAMPLES as u64,
            lift(|b| speech_decode(b).map(|p| pcm_to_bytes(&p))),
        ),
        "channel_encode" => mid(sb, cb, lift(channel_encode)),
        "channel_decode" => mid(
            cb,
            sb,
            // a frame failing its parity check is replaced by silence
            lift(|b| match channel_decode(b) {
                Ok(d) => Ok(d.block),
                Err(GsmError::UncorrectableFrame) => Ok(vec![0; SPEECH_BITS]),
                Err(e) => Err(e),
            }),
        ),
        "interleave" => mid(cb, cb, lift(|b| interleave(b).map(|v| v.concat()))),
        "deinterleave" => mid(
            cb,
            cb,
            lift(|b| deinterleave(&b.chunks(BURST_BITS).map(<[u8]>::to_vec).collect::<Vec<_>>())),
        ),
        "cipher" | "decipher" => {
            let key = param_u64(cfg, "key", env.key)?;
            mid(cb, cb, stream_cipher(key))
        }
        "gmsk_modulate" => {
            let g = gmsk_of(cfg)?;
            let n = g.samples_for(CODED_BITS) as u64;
            mid(cb, n, lift(move |b| g.modulate(b).map(|s| iq_to_bytes(&s))))
        }
        "gmsk_demodulate" => {
            let g = gmsk_of(cfg)?;
            let n = g.samples_for(CODED_BITS) as u64;
            mid(n, cb, lift(move |b| g.demodulate(&iq_from_bytes(b))))
        }
        other => Err(format!("unknown op `{other}`")),
    }
}

fn stage(name: &str, op: &str, in_rate: u64, out_rate: u64) -> StageConfig {
    StageConfig {
        name: name.into(),
        op: op.into(),
        in_rate,
        out_rate,
        in_ports: None,
        out_ports: None,
        params: BTreeMap::new(),
    }
}

fn chain_config(stages: Vec<StageConfig>, widths: &[usize]) -> TopologyConfig {
    let edge = stages
        .windows(2)
        .zip(widths)
        .map(|(w, &width)| EdgeConfig {
            from: w[0].name.clone(),
            to: w[1].name.clone(),
            rate: w[0].out_rate,
            width,
            active: true,
        })
        .collect();
    TopologyConfig { stage: stages, edge }
}

fn iq_len() -> u64 {
    Gmsk::default().samples_for(CODED_BITS) as u64
}

fn down_ops() -> Vec<StageConfig> {
    let (fs, sb, cb) = (FRAME_SAMPLES as u64, SPEECH_BITS as u64, CODED_BITS as u64);
    vec![
        stage("speechCoder", "speech_encode", fs, sb),
        stage("channelCoder", "channel_encode", sb, cb),
        stage("interleaver", "interleave", cb, cb),
        stage("cipher", "cipher", cb, cb),
        stage("modulator", "gmsk_modulate", cb, iq_len()),
    ]
}

fn up_ops() -> Vec<StageConfig> {
    let (fs, sb, cb) = (FRAME_SAMPLES as u64, SPEECH_BITS as u64, CODED_BITS as u64);
    vec![
        stage("demodulator", "gmsk_demodulate", iq_len(), cb),
        stage("decipher", "decipher", cb, cb),
        stage("deinterleaver", "deinterleave", cb, cb),
        stage("channelDecoder", "channel_decode", cb, sb),
        stage("speechDecoder", "speech_decode", sb, fs),
    ]
}

fn pcm_source() -> StageConfig {
    let mut s = stage("source", "file_source", 0, FRAME_SAMPLES as u64);
    s.params.insert("width".into(), toml::Value::Integer(2));
    s
}

/// PCM in, IQ samples out.
pub fn downlink_config() -> TopologyConfig {
    let mut s = vec![pcm_source()];
    s.extend(down_ops());
    s.push(stage("sink", "file_sink", iq_len(), 0));
    chain_config(s, &[2, 1, 1, 1, 1, 8])
}

/// IQ samples in, PCM out.
pub fn uplink_config() -> TopologyConfig {
    let mut src = stage("source", "file_source", 0, iq_len());
    src.params.insert("width".into(), toml::Value::Integer(8));
    let mut s = vec![src];
    s.extend(up_ops());
    s.push(stage("sink", "file_sink", FRAME_SAMPLES as u64, 0));
    chain_config(s, &[8, 1, 1, 1, 1, 2])
}

/// Downlink followed by uplink over a noiseless channel, PCM to PCM.
pub fn round_trip_config() -> TopologyConfig {
    let mut s = vec![pcm_source()];
    s.extend(down_ops());
    s.extend(up_ops());
    s.push(stage("sink", "file_sink", FRAME_SAMPLES as u64, 0));
    chain_config(s, &[2, 1, 1, 1, 1, 8, 1, 1, 1, 1, 2])
}

fn build(cfg: &TopologyConfig, env: &OpEnv) -> Result<Topology, DataplaneError> {
    Topology::from_config(cfg, &|s| stage_from_config(s, env))
}

pub fn build_downlink(env: &OpEnv) -> Result<Topology, DataplaneError> {
    build(&downlink_config(), env)
}

pub fn build_uplink(env: &OpEnv) -> Result<Topology, DataplaneError> {
    build(&uplink_config(), env)
}

pub fn build_round_trip(env: &OpEnv) -> Result<Topology, DataplaneError> {
    build(&round_trip_config(), env)
}
