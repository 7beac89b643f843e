//! One test per acceptance criterion. Run with
//! `cargo test -p syncdsp --test acceptance -- --nocapture --test-threads=1`
//! to see the pass/fail lines.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use syncdsp::dataplane::*;
use syncdsp::dpm::{compare_schedulers, DpmRun, SchedulerReport};
use syncdsp::drm::{DrmBug, DrmMode, DrmOptions, PipelineRun};
use syncdsp::gsm::*;
use syncdsp::kernel::*;
use syncdsp::verify::*;

fn report(id: u32, what: &str, limit: Duration, start: Instant, outcome: Result<String, String>) {
    let took = start.elapsed();
    let outcome = outcome.and_then(|m| {
        if took <= limit {
            Ok(m)
        } else {
            Err(format!("{m}; took {took:?}, limit {limit:?}"))
        }
    });
    match outcome {
        Ok(m) => println!("PASS {id} {what}: {m} ({took:.2?})"),
        Err(m) => {
            println!("FAIL {id} {what}: {m} ({took:.2?})");
            panic!("criterion {id} failed: {m}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_pcm(r: &mut ChaCha8Rng) -> Vec<i16> {
    (0..FRAME_SAMPLES).map(|_| r.gen()).collect()
}

fn pcm_bytes(frames: &[Vec<i16>]) -> Vec<u8> {
    frames.iter().flatten().flat_map(|s| s.to_le_bytes()).collect()
}

#[test]
fn c1_framing_contract() {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(101);
    let outcome = (|| {
        for f in 0..1000 {
            let s = speech_encode(&random_pcm(&mut r)).map_err(|e| e.to_string())?;
            let c = channel_encode(&s).map_err(|e| e.to_string())?;
            let b = interleave(&c).map_err(|e| e.to_string())?;
            ensure(s.len() == 260, || format!("frame {f}: speech {} bits", s.len()))?;
            ensure(c.len() == 456, || format!("frame {f}: coded {} bits", c.len()))?;
            ensure(b.len() == 8 && b.iter().all(|x| x.len() == 57), || {
                format!("frame {f}: bad bursts")
            })?;
        }
        Ok("1000 frames: 260 / 456 / 8x57".to_string())
    })();
    report(1, "framing contract", Duration::from_secs(1), start, outcome);
}

#[test]
fn c2_full_chain_round_trip() {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(102);
    // frames in the image of the framing codec; the codec keeps 260 of every 2560 bits
    let frames: Vec<Vec<i16>> = (0..100)
        .map(|_| speech_decode(&speech_encode(&random_pcm(&mut r)).unwrap()).unwrap())
        .collect();
    let input = pcm_bytes(&frames);
    let outcome = (|| {
        let env = OpEnv {
            input: Arc::new(input.clone()),
            key: 0x5eed,
        };
        let topo = build_round_trip(&env).map_err(|e| e.to_string())?;
        let mut run = DpmRun::new(topo).map_err(|e| e.to_string())?;
        run.run_items(100).map_err(|e| e.to_string())?;
        let out = run.sink_output(run.sinks()[0]);
        let errors = out.iter().zip(&input).filter(|(a, b)| a != b).count() + input.len().abs_diff(out.len());
        ensure(errors == 0, || format!("{errors} byte errors"))?;
        Ok(format!("100 frames, {} PCM bytes bit-exact", input.len()))
    })();
    report(2, "full-chain round trip", Duration::from_secs(10), start, outcome);
}

#[test]
fn c3_error_correction() {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(103);
    let block: Vec<u8> = (0..SPEECH_BITS).map(|_| r.gen_range(0..2)).collect();
    let outcome = (|| {
        let frame = channel_encode(&block).map_err(|e| e.to_string())?;
        let n = 2 * LAYOUT.protected();
        for k in 0..n {
            let mut f = frame.clone();
            f[k] ^= 1;
            let d = channel_decode(&f).map_err(|e| format!("flip {k}: {e}"))?;
            ensure(d.block == block, || format!("flip {k}: block not recovered"))?;
            ensure(d.errors >= 1, || format!("flip {k}: no error reported"))?;
        }
        Ok(format!("{n} single flips corrected"))
    })();
    report(3, "error correction", Duration::from_secs(5), start, outcome);
}

#[test]
fn c4_gmsk() {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(104);
    let bits: Vec<u8> = (0..100_000).map(|_| r.gen_range(0..2)).collect();
    let outcome = (|| {
        let s = gmsk_modulate(&bits).map_err(|e| e.to_string())?;
        let worst = s[..10_000].iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max);
        ensure(worst <= 1e-9, || format!("envelope deviation {worst:e}"))?;
        let back = gmsk_demodulate(&s).map_err(|e| e.to_string())?;
        let errors = back.iter().zip(&bits).filter(|(a, b)| a != b).count();
        ensure(back.len() == bits.len() && errors == 0, || {
            format!("{errors} bit errors")
        })?;
        Ok(format!(
            "envelope deviation {worst:.1e}, BER 0 over {} bits",
            bits.len()
        ))
    })();
    report(4, "GMSK", Duration::from_secs(30), start, outcome);
}

#[test]
fn c5_verification_verdicts() {
    let start = Instant::now();
    let outcome = (|| {
        let topo = build_downlink(&OpEnv::default()).map_err(|e| e.to_string())?;
        let a = alphabet(&topo);
        let signals = [S1_VIOLATED, S2_VIOLATED, S3_VIOLATED];
        let verdicts = |bug: Option<DrmBug>| -> Result<(Program, Vec<EmissionVerdict>), String> {
            let p = observed(&topo, bug, 14);
            let fsm = extract_fsm(&p, &a, &ExtractOptions::default()).map_err(|e| e.to_string())?;
            let v = signals.iter().map(|s| check_emission(&fsm, s).unwrap()).collect();
            Ok((p, v))
        };
        let (_, ok) = verdicts(None)?;
        for v in &ok {
            ensure(v.status == EmissionStatus::NeverEmitted, || {
                format!("correct model: {} possibly emitted", v.signal)
            })?;
        }
        let bugs = [
            (DrmBug::EarlyAck("speechCoder".into()), S1_VIOLATED),
            (DrmBug::DroppedCancel("speechCoder".into()), S3_VIOLATED),
            (DrmBug::MissingSinkAck, S2_VIOLATED),
        ];
        let mut notes = Vec::new();
        for (bug, expected) in bugs {
            let (p, v) = verdicts(Some(bug.clone()))?;
            let hit = v.iter().find(|v| v.signal == expected).unwrap();
            ensure(hit.status == EmissionStatus::PossiblyEmitted, || {
                format!("{bug:?}: {expected} never emitted")
            })?;
            let w = hit.witness.as_ref().unwrap();
            ensure(replay_witness(&p, w, expected).map_err(|e| e.to_string())?, || {
                format!("{bug:?}: witness does not replay")
            })?;
            notes.push(format!("{expected} in {} ticks", w.len()));
        }
        Ok(format!("D=14 all never-emitted; bugs: {}", notes.join(", ")))
    })();
    report(5, "verification verdicts", Duration::from_secs(120), start, outcome);
}

/// Oracle: unit-cost schedule where a stage may compute item j once its
/// upstream computed j on an earlier tick and its output buffer of two
/// frames has room.
fn brute_force_drm(n: usize, k: usize) -> usize {
    let mut done = vec![0usize; n]; // items computed per stage
    let mut tick = 0;
    while done[n - 1] < k {
        let before = done.clone();
        for i in 0..n {
            let input_ready = i == 0 || before[i - 1] > before[i];
            let room = i == n - 1 || before[i] - before[i + 1] < 2;
            if before[i] < k && input_ready && room {
                done[i] += 1;
            }
        }
        tick += 1;
    }
    tick
}

#[test]
fn c6_scheduling_speedup() {
    let start = Instant::now();
    let outcome = (|| {
        let topo = pass_chain(7, 4);
        let r = compare_schedulers(&topo, 100).map_err(|e| e.to_string())?;
        let oracle = SchedulerReport {
            dpm_ticks: 7 * 100,
            drm_ticks: brute_force_drm(7, 100) as u64,
        };
        ensure(
            oracle
                == SchedulerReport {
                    dpm_ticks: 700,
                    drm_ticks: 106,
                },
            || format!("oracle {oracle:?}"),
        )?;
        ensure(r == oracle, || format!("measured {r:?}, oracle {oracle:?}"))?;
        Ok(format!("DPM {} ticks, DRM {} ticks", r.dpm_ticks, r.drm_ticks))
    })();
    report(6, "scheduling speedup", Duration::from_secs(5), start, outcome);
}

fn mixing(seed: u64, out_len: usize) -> ComputeFn {
    Arc::new(move |c: &ComputeCtx, b: &[u8]| {
        let mut h = seed ^ c.input.index.wrapping_mul(0x9E37_79B9);
        for &x in b {
            h = (h ^ x as u64).wrapping_mul(0x100_0000_01B3);
        }
        Ok((0..out_len * c.out_width.max(1))
            .map(|i| (h.wrapping_add(i as u64).wrapping_mul(0x2545_F491_4F6C_DD1D) >> 56) as u8)
            .collect())
    })
}

/// Random tree: one source, intermediate stages with random rates, leaves are sinks.
fn random_topology(r: &mut ChaCha8Rng) -> Topology {
    let n = r.gen_range(2..=8);
    let mut parent = vec![usize::MAX; n];
    for (i, p) in parent.iter_mut().enumerate().skip(1) {
        *p = r.gen_range(0..i);
    }
    let has_child: Vec<bool> = (0..n).map(|i| parent.contains(&i)).collect();
    let out_rate: Vec<u64> = (0..n).map(|_| r.gen_range(1..=5)).collect();
    let mut t = Topology::new();
    for i in 0..n {
        let name = format!("n{i}");
        let seed = r.gen();
        let d = if i == 0 {
            let s = r.gen::<u64>();
            StageDescriptor::source(
                name,
                out_rate[0],
                Arc::new(move |c: &ComputeCtx, _: &[u8]| {
                    Ok((0..c.output.size).map(|k| ((c.output.index + k) ^ s) as u8).collect())
                }),
            )
        } else if has_child[i] {
            let outs = (0..n).filter(|&j| parent[j] == i).count();
            StageDescriptor::intermediate(
                name,
                out_rate[parent[i]],
                out_rate[i],
                mixing(seed, out_rate[i] as usize),
            )
            .with_ports(1, outs)
        } else {
            StageDescriptor::sink(name, out_rate[parent[i]], mixing(seed, 3))
        };
        let d = if i == 0 {
            d.with_ports(0, (1..n).filter(|&j| parent[j] == 0).count())
        } else {
            d
        };
        t.add_stage(d).unwrap();
    }
    for i in 1..n {
        t.connect(&format!("n{}", parent[i]), &format!("n{i}"), out_rate[parent[i]], 1)
            .unwrap();
    }
    t
}

#[test]
fn c7_scheduler_equivalence() {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(107);
    let outcome = (|| {
        let mut stages = 0;
        for case in 0..20 {
            let topo = random_topology(&mut r);
            stages += topo.stages.len();
            let items = r.gen_range(1..=12);
            compare_schedulers(&topo, items).map_err(|e| format!("case {case}: {e}"))?;
        }
        // the GSM round trip as well, under the two-tick protocol
        let mut g = ChaCha8Rng::seed_from_u64(7);
        let frames: Vec<Vec<i16>> = (0..4).map(|_| random_pcm(&mut g)).collect();
        let env = OpEnv {
            input: Arc::new(pcm_bytes(&frames)),
            key: 9,
        };
        let topo = build_round_trip(&env).map_err(|e| e.to_string())?;
        let mut dpm = DpmRun::new(topo.clone()).map_err(|e| e.to_string())?;
        dpm.run_items(4).map_err(|e| e.to_string())?;
        let opts = DrmOptions {
            mode: DrmMode::TwoTick,
            avail: true,
            bug: None,
        };
        let mut drm = PipelineRun::new(topo, opts).map_err(|e| e.to_string())?;
        drm.run_items(4).map_err(|e| e.to_string())?;
        let sink = dpm.sinks()[0];
        ensure(dpm.sink_output(sink) == drm.sink_output(sink), || {
            "GSM round trip outputs differ".into()
        })?;
        Ok(format!(
            "20 random topologies ({stages} stages) plus GSM round trip identical"
        ))
    })();
    report(7, "scheduler equivalence", Duration::from_secs(60), start, outcome);
}

#[test]
fn c8_verifier_soundness() {
    let start = Instant::now();
    let outcome = (|| {
        let mut models = 0;
        let mut outputs = 0;
        for n in 2..=7 {
            let topo = pass_chain(n, 2);
            let a = alphabet(&topo);
            let pick = if n == 2 { 0 } else { 1 };
            let bugs = [
                None,
                Some(DrmBug::EarlyAck(topo.stages[pick].name.clone())),
                Some(DrmBug::DroppedCancel(topo.stages[0].name.clone())),
                Some(DrmBug::MissingSinkAck),
            ];
            for bug in bugs {
                for d in [1, n as u32, 2 * n as u32, 14] {
                    let p = observed(&topo, bug.clone(), d);
                    outputs += soundness(&p, &a).map_err(|e| format!("n={n} {bug:?} D={d}: {e}"))?;
                    models += 1;
                }
            }
        }
        Ok(format!(
            "{models} models, {outputs} output verdicts agree with simulation"
        ))
    })();
    report(8, "verifier soundness", Duration::from_secs(300), start, outcome);
}

fn random_events(p: &Program, r: &mut ChaCha8Rng, pool: &[Letter]) -> Vec<SignalEvent> {
    let l = &pool[r.gen_range(0..pool.len())];
    l.iter()
        .map(|(n, v)| match v {
            None => p.event(n).unwrap(),
            Some(v) => p.event_with(n, *v).unwrap(),
        })
        .collect()
}

fn probe(program: &Program, pool: &[Letter], seed: u64) -> Result<(), String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut p = program.clone();
    let cap = p.signals().len() + 1;
    for k in 0..10_000 {
        if k % 40 == 0 {
            p = program.clone();
        }
        let ev = random_events(&p, &mut r, pool);
        let snap = p.snapshot();
        let a = p.react_with(&ev, &mut ConstHost).map_err(|e| e.to_string())?;
        let after = p.snapshot();
        p.restore(&snap).map_err(|e| e.to_string())?;
        let b = p.react_with(&ev, &mut ConstHost).map_err(|e| e.to_string())?;
        ensure(a == b && p.snapshot() == after, || {
            format!("probe {k}: reactions differ")
        })?;
        ensure(a.micro_steps <= cap, || {
            format!("probe {k}: {} micro-steps, cap {cap}", a.micro_steps)
        })?;
        if p.is_halted() {
            p = program.clone();
        }
    }
    Ok(())
}

#[test]
fn c9_kernel_determinism() {
    let start = Instant::now();
    let outcome = (|| {
        let topo = build_downlink(&OpEnv::default()).map_err(|e| e.to_string())?;
        let mut models: Vec<(Program, Vec<Letter>)> = Vec::new();
        let mut a = alphabet(&topo);
        a.push(vec![(syncdsp::drm::USER_QUIT.to_string(), None)]);
        models.push((observed(&topo, None, 14), a.clone()));
        models.push((observed(&topo, Some(DrmBug::MissingSinkAck), 14), a));
        let fast = DrmOptions {
            mode: DrmMode::Fast,
            avail: true,
            bug: None,
        };
        let (p, _) = syncdsp::drm::build_program(&pass_chain(5, 3), &fast).map_err(|e| e.to_string())?;
        let mut pool = alphabet(&pass_chain(5, 3));
        for s in ["s0", "s1", "s2", "s3", "s4"] {
            let n = syncdsp::drm::avail(s);
            pool = pool
                .into_iter()
                .flat_map(|l| {
                    let mut with = l.clone();
                    with.push((n.clone(), None));
                    [l, with]
                })
                .collect();
        }
        models.push((p, pool));
        for (i, (p, pool)) in models.iter().enumerate() {
            probe(p, pool, 900 + i as u64).map_err(|e| format!("model {i}: {e}"))?;
        }
        Ok(format!(
            "{} models x 10^4 probes repeatable within the micro-step cap",
            models.len()
        ))
    })();
    report(9, "kernel determinism", Duration::from_secs(30), start, outcome);
}
