mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use syncdsp::drm::DrmBug;
use syncdsp::kernel::*;
use syncdsp::verify::*;

fn toggle() -> Program {
    let a = ControlAutomaton::new("toggle", "Off")
        .on("Off", Guard::present("tick"), vec![Emission::pure("on")], "On")
        .on("On", Guard::present("tick"), vec![], "Off");
    Program::declare(ProgramSpec {
        signals: vec![SignalDecl::input("tick"), SignalDecl::output("on")],
        automata: vec![a],
        abort: None,
    })
    .unwrap()
}

fn tick_alphabet() -> Vec<Letter> {
    vec![vec![], vec![("tick".to_string(), None)]]
}

#[test]
fn toggle_fsm_has_two_states_and_four_transitions() {
    let fsm = extract_fsm(&toggle(), &tick_alphabet(), &ExtractOptions::default()).unwrap();
    assert_eq!(fsm.state_count(), 2);
    assert_eq!(fsm.transition_count(), 4);
    assert_eq!(minimize(&fsm).state_count(), 2);
    let v = check_emission(&fsm, "on").unwrap();
    assert_eq!(v.status, EmissionStatus::PossiblyEmitted);
    assert_eq!(v.witness.unwrap(), vec![vec![("tick".to_string(), None)]]);
}

#[test]
fn fsm_text_lists_every_transition() {
    let fsm = extract_fsm(&toggle(), &tick_alphabet(), &ExtractOptions::default()).unwrap();
    let text = fsm.to_text();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["0 0 / 0 0", "0 1 / 1 1", "1 0 / 0 1", "1 1 / 0 0"]);
    assert!(text.starts_with("# inputs: tick\n# outputs: on\n"));
}

#[test]
fn alphabet_errors() {
    let p = toggle();
    let bad = vec![vec![("nope".to_string(), None)]];
    assert!(matches!(
        extract_fsm(&p, &bad, &ExtractOptions::default()),
        Err(VerifyError::UnknownSignal(_))
    ));
    let out = vec![vec![("on".to_string(), None)]];
    assert!(matches!(
        extract_fsm(&p, &out, &ExtractOptions::default()),
        Err(VerifyError::NotAnInput(_))
    ));
    let fsm = extract_fsm(&p, &tick_alphabet(), &ExtractOptions::default()).unwrap();
    assert!(matches!(
        check_emission(&fsm, "zzz"),
        Err(VerifyError::UnknownSignal(_))
    ));
}

#[test]
fn extraction_matches_depth_first_oracle() {
    for n in 2..=4 {
        let t = pass_chain(n, 2);
        let p = observed(&t, None, 4 * n as u32);
        let a = alphabet(&t);
        let fsm = extract_fsm(&p, &a, &ExtractOptions::default()).unwrap();
        assert_eq!(fsm.state_count(), dfs_count(&p, &a), "n={n}");
        assert_eq!(fsm.transition_count(), fsm.state_count() * a.len());
    }
}

#[test]
fn state_limit_is_reported() {
    let t = pass_chain(7, 4);
    let p = observed(&t, None, 14);
    let opts = ExtractOptions {
        max_states: 5,
        workers: 1,
    };
    assert_eq!(
        extract_fsm(&p, &alphabet(&t), &opts),
        Err(VerifyError::StateExplosion { limit: 5 })
    );
}

#[test]
fn workers_do_not_change_the_fsm() {
    let t = pass_chain(7, 4);
    let p = observed(&t, Some(DrmBug::MissingSinkAck), 14);
    let a = alphabet(&t);
    let one = extract_fsm(
        &p,
        &a,
        &ExtractOptions {
            workers: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let four = extract_fsm(
        &p,
        &a,
        &ExtractOptions {
            workers: 4,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(one, four);
    assert_eq!(one.to_text(), four.to_text());
}

fn verdicts(bug: Option<DrmBug>, d: u32) -> (Program, Vec<EmissionVerdict>) {
    let t = pass_chain(7, 4);
    let p = observed(&t, bug, d);
    let fsm = extract_fsm(&p, &alphabet(&t), &ExtractOptions::default()).unwrap();
    let v = [S1_VIOLATED, S2_VIOLATED, S3_VIOLATED]
        .iter()
        .map(|s| check_emission(&fsm, s).unwrap())
        .collect();
    (p, v)
}

fn statuses(v: &[EmissionVerdict]) -> Vec<bool> {
    v.iter().map(|v| v.status == EmissionStatus::PossiblyEmitted).collect()
}

#[test]
fn correct_downlink_never_violates() {
    let (_, v) = verdicts(None, 14);
    assert_eq!(statuses(&v), [false, false, false]);
    assert!(v.iter().all(|v| v.witness.is_none()));
}

#[test]
fn tight_bound_violates_latency_only() {
    let (p, v) = verdicts(None, 13);
    assert_eq!(statuses(&v), [false, true, false]);
    let w = v[1].witness.as_ref().unwrap();
    assert!(replay_witness(&p, w, S2_VIOLATED).unwrap());
    let (_, v) = verdicts(None, 1);
    assert!(statuses(&v)[1]);
}

#[test]
fn injected_bugs_are_caught_and_witnesses_replay() {
    let cases = [
        (DrmBug::EarlyAck("spcoder".into()), 0),
        (DrmBug::DroppedCancel("spcoder".into()), 2),
        (DrmBug::MissingSinkAck, 1),
    ];
    for (bug, which) in cases {
        let (p, v) = verdicts(Some(bug.clone()), 14);
        assert!(statuses(&v)[which], "{bug:?}");
        for verdict in v.iter().filter(|v| v.status == EmissionStatus::PossiblyEmitted) {
            let w = verdict.witness.as_ref().unwrap();
            assert!(
                replay_witness(&p, w, &verdict.signal).unwrap(),
                "{bug:?} {}",
                verdict.signal
            );
            assert!(!replay_witness(&p, &w[..w.len() - 1], &verdict.signal).unwrap());
        }
    }
}

#[test]
fn witnesses_are_shortest_and_least() {
    let t = pass_chain(3, 2);
    let p = observed(&t, Some(DrmBug::EarlyAck("s1".into())), 8);
    let a = alphabet(&t);
    let fsm = extract_fsm(&p, &a, &ExtractOptions::default()).unwrap();
    let v = check_emission(&fsm, S1_VIOLATED).unwrap();
    let w = v.witness.unwrap();
    let idx = |l: &Letter| fsm.letters.iter().position(|x| x == l).unwrap();
    let target: Vec<usize> = w.iter().map(idx).collect();
    let mut found = None;
    'outer: for len in 1..=w.len() {
        let total = fsm.letters.len().pow(len as u32);
        for mut code in 0..total {
            let mut seq = vec![0; len];
            for slot in seq.iter_mut().rev() {
                *slot = code % fsm.letters.len();
                code /= fsm.letters.len();
            }
            if fsm.run(&seq).last().unwrap().contains(&S1_VIOLATED) {
                found = Some(seq);
                break 'outer;
            }
        }
    }
    assert_eq!(found.unwrap(), target);
}

#[test]
fn observers_watch_without_interfering() {
    let t = pass_chain(4, 2);
    let (base, _) = syncdsp::drm::build_program(&t, &two_tick(None)).unwrap();
    let composed = observed(&t, None, 8);
    let a = alphabet(&t);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let mut p = base.clone();
        let mut q = composed.clone();
        for _ in 0..30 {
            let l = &a[rng.gen_range(0..a.len())];
            let ev = |x: &Program| -> Vec<SignalEvent> {
                l.iter()
                    .map(|(n, v)| match v {
                        None => x.event(n).unwrap(),
                        Some(v) => x.event_with(n, *v).unwrap(),
                    })
                    .collect()
            };
            let r1 = p.react_with(&ev(&p), &mut ConstHost).unwrap();
            let r2 = q.react_with(&ev(&q), &mut ConstHost).unwrap();
            let n1: Vec<&str> = r1.outputs.iter().map(|e| p.signal_name(e.id)).collect();
            let n2: Vec<&str> = r2
                .outputs
                .iter()
                .map(|e| q.signal_name(e.id))
                .filter(|n| !n.starts_with("S") || !n.ends_with("_VIOLATED"))
                .collect();
            assert_eq!(n1, n2);
        }
    }
}

#[test]
fn compose_rules() {
    let t = pass_chain(3, 2);
    let (p, _) = syncdsp::drm::build_program(&t, &two_tick(None)).unwrap();
    assert_eq!(compose(&p, &[]).unwrap().fingerprint(), p.fingerprint());
    let obs = standard_observers(&p, &t, 6).unwrap();
    let twice = [obs[0].clone(), obs[0].clone()];
    assert!(matches!(compose(&p, &twice), Err(VerifyError::SignalCollision(_))));

    let mut rogue = obs[0].clone();
    rogue.name = "rogue".into();
    rogue.violation = "R".into();
    rogue.signals = vec![SignalDecl::output("R")];
    rogue.automata = vec![ControlAutomaton::new("rogue", "w").on(
        "w",
        Guard::True,
        vec![Emission::pure(syncdsp::drm::ready("s1"))],
        "w",
    )];
    assert!(matches!(
        compose(&p, &[rogue]),
        Err(VerifyError::ObserverInterference { .. })
    ));
    assert!(matches!(
        make_observer_s2(&p, 0, &[], &[]),
        Err(VerifyError::BadBound(0))
    ));
}

#[test]
fn always_ready_never_trips_s1() {
    let p = Program::declare(ProgramSpec {
        signals: vec![SignalDecl::input("c"), SignalDecl::output("r")],
        automata: vec![ControlAutomaton::new("env", "s").sustain("s", "r")],
        abort: None,
    })
    .unwrap();
    let obs = make_observer_s1(&p, &[("c".into(), "r".into())]).unwrap();
    let c = compose(&p, &[obs]).unwrap();
    let a = vec![vec![], vec![("c".to_string(), None)]];
    let fsm = extract_fsm(&c, &a, &ExtractOptions::default()).unwrap();
    let v = check_emission(&fsm, S1_VIOLATED).unwrap();
    // first tick has no predecessor in which `r` was present
    assert_eq!(v.status, EmissionStatus::PossiblyEmitted);
    assert_eq!(v.witness.unwrap().len(), 1);
    let mut q = c.clone();
    q.react_names(&[]).unwrap();
    let fsm = extract_fsm(&q, &a, &ExtractOptions::default()).unwrap();
    assert_eq!(
        check_emission(&fsm, S1_VIOLATED).unwrap().status,
        EmissionStatus::NeverEmitted
    );
}

#[test]
fn latency_observer_is_a_countdown_chain() {
    let t = pass_chain(7, 4);
    let (p, _) = syncdsp::drm::build_program(&t, &two_tick(None)).unwrap();
    let obs = standard_observers(&p, &t, 14).unwrap();
    let s2 = &obs[1];
    assert_eq!(s2.bound, Some(14));
    let states = &s2.automata[0].states;
    for k in 1..=14 {
        assert!(states.contains(&format!("C{k}")), "C{k}");
    }
    assert!(!states.contains(&"C15".to_string()));
}

#[test]
fn never_emitted_signal_is_reported() {
    let a = ControlAutomaton::new("a", "s").on("s", Guard::and([Guard::present("x"), Guard::absent("x")]), vec![], "s");
    let b = ControlAutomaton::new("b", "s").on("s", Guard::pre("ghost"), vec![Emission::pure("ghost")], "s");
    let p = Program::declare(ProgramSpec {
        signals: vec![SignalDecl::input("x"), SignalDecl::output("ghost")],
        automata: vec![a, b],
        abort: None,
    })
    .unwrap();
    let fsm = extract_fsm(&p, &[vec![], vec![("x".to_string(), None)]], &ExtractOptions::default()).unwrap();
    let v = check_emission(&fsm, "ghost").unwrap();
    assert_eq!(v.status, EmissionStatus::NeverEmitted);
    assert!(v.witness.is_none());
}

#[test]
fn verdicts_agree_with_simulation_on_small_models() {
    let mut checked = 0;
    for n in 2..=4 {
        let t = pass_chain(n, 2);
        let bugs = [
            None,
            Some(DrmBug::EarlyAck("s1".into())),
            Some(DrmBug::DroppedCancel("s0".into())),
            Some(DrmBug::MissingSinkAck),
        ];
        for bug in bugs {
            for d in [2, 2 * n as u32, 4 * n as u32] {
                let p = observed(&t, bug.clone(), d);
                checked += soundness(&p, &alphabet(&t)).unwrap();
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn duplicated_state_merges() {
    let fsm = extract_fsm(&toggle(), &tick_alphabet(), &ExtractOptions::default()).unwrap();
    let mut big = fsm.clone();
    // state 2 copies state 1, and state 0's tick edge now points at it
    big.trans.push(big.trans[1].clone());
    big.trans[0][1].next = 2;
    let m = minimize(&big);
    assert_eq!(m.state_count(), big.state_count() - 1);
}

fn random_fsm(rng: &mut ChaCha8Rng, n: usize, letters: usize, outs: usize) -> Fsm {
    Fsm {
        inputs: vec!["i".into()],
        outputs: (0..1).map(|k| format!("o{k}")).collect(),
        letters: (0..letters).map(|k| vec![(format!("l{k}"), None)]).collect(),
        out_sets: (0..outs).map(|k| if k == 0 { vec![] } else { vec![0] }).collect(),
        trans: (0..n)
            .map(|_| {
                (0..letters)
                    .map(|_| syncdsp::verify::Transition {
                        out: rng.gen_range(0..outs) as u32,
                        next: rng.gen_range(0..n) as u32,
                    })
                    .collect()
            })
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn minimisation_preserves_traces(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fsm = random_fsm(&mut rng, 50, 2, 2);
        let m = minimize(&fsm);
        prop_assert!(m.state_count() <= fsm.state_count());
        prop_assert_eq!(minimize(&m).state_count(), m.state_count());
        for _ in 0..40 {
            let len = rng.gen_range(0..=10);
            let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..2)).collect();
            prop_assert_eq!(fsm.run(&w), m.run(&w));
        }
    }
}
