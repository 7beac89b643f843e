use proptest::prelude::*;
use syncdsp::dataplane::SampleRange;
use syncdsp::kernel::*;

fn toggle() -> Program {
    let a = ControlAutomaton::new("toggle", "Off")
        .on("Off", Guard::present("tick"), vec![], "On")
        .on("On", Guard::present("tick"), vec![], "Off");
    Program::declare(ProgramSpec {
        signals: vec![SignalDecl::input("tick")],
        automata: vec![a],
        abort: None,
    })
    .unwrap()
}

fn chain() -> Program {
    let p = ControlAutomaton::new("P", "s").on("s", Guard::present("GO"), vec![Emission::pure("A")], "s");
    let q = ControlAutomaton::new("Q", "s")
        .on("s", Guard::present("A"), vec![Emission::pure("B")], "s")
        .suspendable();
    Program::declare(ProgramSpec {
        signals: vec![
            SignalDecl::input("GO"),
            SignalDecl::output("A"),
            SignalDecl::output("B"),
        ],
        automata: vec![p, q],
        abort: None,
    })
    .unwrap()
}

fn names(p: &Program, r: &Reaction) -> Vec<String> {
    r.outputs.iter().map(|e| p.signal_name(e.id).to_string()).collect()
}

#[test]
fn toggle_program_has_two_states() {
    let mut p = toggle();
    assert_eq!(p.state_count(), 2);
    assert_eq!(p.tick(), 0);
    let r = p.react_names(&["tick"]).unwrap();
    assert!(r.outputs.is_empty());
    assert_eq!(p.current_state(0), "On");
    p.react_names(&[]).unwrap();
    assert_eq!(p.current_state(0), "On");
}

#[test]
fn emissions_propagate_within_one_tick() {
    let mut p = chain();
    let r = p.react_names(&["GO"]).unwrap();
    assert_eq!(names(&p, &r), ["A", "B"]);
    assert_eq!(r.micro_steps, 2);
    assert_eq!(r.trace_line(&p), "tick=0 in=GO out=A,B steps=2");
}

#[test]
fn overlapping_guards_are_nondeterministic() {
    let a = ControlAutomaton::new("x", "s")
        .on("s", Guard::present("A"), vec![], "t")
        .on("s", Guard::present("A"), vec![], "s")
        .on("t", Guard::True, vec![], "s");
    let err = Program::declare(ProgramSpec {
        signals: vec![SignalDecl::input("A")],
        automata: vec![a],
        abort: None,
    })
    .unwrap_err();
    assert!(matches!(err, KernelError::NondeterministicAutomaton { .. }));
}

#[test]
fn declaration_errors() {
    let dup = ProgramSpec {
        signals: vec![SignalDecl::input("A"), SignalDecl::output("A")],
        automata: vec![],
        abort: None,
    };
    assert_eq!(
        Program::declare(dup).unwrap_err(),
        KernelError::DuplicateSignal("A".into())
    );

    let unknown = ProgramSpec {
        signals: vec![SignalDecl::input("A")],
        automata: vec![ControlAutomaton::new("x", "s").on("s", Guard::present("Z"), vec![], "s")],
        abort: None,
    };
    assert!(matches!(
        Program::declare(unknown).unwrap_err(),
        KernelError::UnknownSignalInGuard { signal, .. } if signal == "Z"
    ));

    let mut orphan = ControlAutomaton::new("x", "s").on("s", Guard::present("A"), vec![], "s");
    orphan.add_state("lost");
    let unreachable = ProgramSpec {
        signals: vec![SignalDecl::input("A")],
        automata: vec![orphan],
        abort: None,
    };
    assert!(matches!(
        Program::declare(unreachable).unwrap_err(),
        KernelError::UnreachableState { .. }
    ));

    let absence_emit = ProgramSpec {
        signals: vec![SignalDecl::output("A"), SignalDecl::output("B")],
        automata: vec![ControlAutomaton::new("x", "s").on("s", Guard::absent("A"), vec![Emission::pure("B")], "s")],
        abort: None,
    };
    assert!(matches!(
        Program::declare(absence_emit).unwrap_err(),
        KernelError::AbsenceGuardedEmission { .. }
    ));
}

#[test]
fn absence_moves_but_cannot_emit() {
    let watcher = ControlAutomaton::new("w", "idle")
        .on("idle", Guard::present("A"), vec![], "saw")
        .otherwise("idle", Target::Go("missed".into()))
        .on("saw", Guard::True, vec![], "idle")
        .on("missed", Guard::True, vec![], "idle");
    let driver = ControlAutomaton::new("d", "s").on("s", Guard::present("GO"), vec![Emission::pure("A")], "s");
    let mut p = Program::declare(ProgramSpec {
        signals: vec![SignalDecl::input("GO"), SignalDecl::local("A")],
        automata: vec![watcher, driver],
        abort: None,
    })
    .unwrap();
    p.react_names(&["GO"]).unwrap();
    assert_eq!(p.current_state(0), "saw");
    p.react_names(&[]).unwrap();
    p.react_names(&[]).unwrap();
    assert_eq!(p.current_state(0), "missed");
}

#[test]
fn pre_reads_previous_tick() {
    let a = ControlAutomaton::new("echo", "s").on("s", Guard::pre("X"), vec![Emission::pure("Y")], "s");
    let mut p = Program::declare(ProgramSpec {
        signals: vec![SignalDecl::input("X"), SignalDecl::output("Y")],
        automata: vec![a],
        abort: None,
    })
    .unwrap();
    assert!(p.react_names(&["X"]).unwrap().outputs.is_empty());
    let r = p.react_names(&[]).unwrap();
    assert_eq!(names(&p, &r), ["Y"]);
}

#[test]
fn valued_emissions() {
    let fwd = ControlAutomaton::new("f", "s").on("s", Guard::present("In"), vec![Emission::forward("Out", "In")], "s");
    let fixed = ControlAutomaton::new("c", "s").on(
        "s",
        Guard::present("Clash"),
        vec![Emission::constant("Out", Value::Range(SampleRange::new(7, 1)))],
        "s",
    );
    let mut p = Program::declare(ProgramSpec {
        signals: vec![
            SignalDecl::new("In", SignalKind::Range, SignalRole::Input),
            SignalDecl::input("Clash"),
            SignalDecl::new("Out", SignalKind::Range, SignalRole::Output),
        ],
        automata: vec![fwd, fixed],
        abort: None,
    })
    .unwrap();
    let v = Value::Range(SampleRange::new(0, 1600));
    let input = p.event_with("In", v).unwrap();
    let r = p.react(&[input]).unwrap();
    assert_eq!(r.value_of(p.signal_id("Out").unwrap()), Some(v));
    assert_eq!(r.trace_line(&p), "tick=0 in=In out=Out=0:1600 steps=1");

    let same = Value::Range(SampleRange::new(7, 1));
    let ok = [p.event_with("In", same).unwrap(), p.event("Clash").unwrap()];
    assert_eq!(p.react(&ok).unwrap().outputs.len(), 1);

    let bad = [p.event_with("In", v).unwrap(), p.event("Clash").unwrap()];
    assert!(matches!(
        p.react(&bad).unwrap_err(),
        KernelError::ConflictingValuedEmission { .. }
    ));
    assert_eq!(p.tick(), 2, "failed tick leaves the program untouched");

    let wrong = SignalEvent {
        id: p.signal_id("In").unwrap(),
        value: None,
        tick: 0,
    };
    assert!(matches!(p.react(&[wrong]).unwrap_err(), KernelError::BadPayload { .. }));
    let not_input = p.event("Out").unwrap();
    assert!(matches!(p.react(&[not_input]).unwrap_err(), KernelError::NotAnInput(_)));
}

#[test]
fn host_values_are_requested_on_emission() {
    struct Counter(i64);
    impl ValueHost for Counter {
        fn value(&mut self, _: usize, _: SignalId, _: &str, _: SignalKind) -> Result<Value, String> {
            self.0 += 1;
            Ok(Value::Int(self.0))
        }
    }
    let a = ControlAutomaton::new("h", "s").on("s", Guard::present("GO"), vec![Emission::host("N")], "s");
    let mut p = Program::declare(ProgramSpec {
        signals: vec![
            SignalDecl::input("GO"),
            SignalDecl::new("N", SignalKind::Int, SignalRole::Output),
        ],
        automata: vec![a],
        abort: None,
    })
    .unwrap();
    let go = p.event("GO").unwrap();
    assert!(matches!(p.react(&[go]).unwrap_err(), KernelError::HostValue { .. }));
    let mut host = Counter(0);
    let n = p.signal_id("N").unwrap();
    assert_eq!(p.react_with(&[go], &mut host).unwrap().value_of(n), Some(Value::Int(1)));
    assert_eq!(p.react_with(&[go], &mut host).unwrap().value_of(n), Some(Value::Int(2)));
}

#[test]
fn abort_halts_program() {
    let mut spec = chain().spec().clone();
    spec.signals.push(SignalDecl::input("Quit"));
    spec.abort = Some("Quit".into());
    let mut p = Program::declare(spec).unwrap();
    let r = p.react_names(&["GO", "Quit"]).unwrap();
    assert!(r.outputs.is_empty());
    assert!(p.is_halted());
    assert_eq!(p.react_names(&[]).unwrap_err(), KernelError::Halted);
}

#[test]
fn suspension_freezes_and_resume_restores() {
    let mut p = chain();
    let q = p.automaton_id("Q").unwrap();
    assert!(matches!(p.suspend(0).unwrap_err(), KernelError::NotSuspendable(_)));
    assert!(matches!(p.resume(q).unwrap_err(), KernelError::NotSuspended(_)));

    p.suspend(q).unwrap();
    for _ in 0..3 {
        let r = p.react_names(&["GO"]).unwrap();
        assert_eq!(names(&p, &r), ["A"]);
    }
    p.resume(q).unwrap();
    let r = p.react_names(&["GO"]).unwrap();
    assert_eq!(names(&p, &r), ["A", "B"]);

    p.suspend(q).unwrap();
    p.resume(q).unwrap();
    let r = p.react_names(&["GO"]).unwrap();
    assert_eq!(names(&p, &r), ["A", "B"]);
}

#[test]
fn rendezvous_defers_emission_until_after_cancel() {
    // Up computes on GO and emits Compute_to_Down unless frozen by take.
    let up = ControlAutomaton::new("up", "Idle")
        .on("Idle", Guard::present("GO"), vec![], "Comp")
        .on("Comp", Guard::True, vec![Emission::pure("Compute_to_Down")], "Idle")
        .with_rendezvous(Rendezvous {
            take: "take".into(),
            cancel: "cancel".into(),
            states: vec!["Comp".into()],
        });
    let mut p = Program::declare(ProgramSpec {
        signals: vec![
            SignalDecl::input("GO"),
            SignalDecl::input("take"),
            SignalDecl::input("cancel"),
            SignalDecl::output("Compute_to_Down"),
        ],
        automata: vec![up],
        abort: None,
    })
    .unwrap();
    p.react_names(&["GO", "take"]).unwrap();
    assert_eq!(p.current_state(0), "Comp");
    for _ in 0..2 {
        assert!(p.react_names(&[]).unwrap().outputs.is_empty());
    }
    assert!(p.react_names(&["cancel"]).unwrap().outputs.is_empty());
    let r = p.react_names(&[]).unwrap();
    assert_eq!(names(&p, &r), ["Compute_to_Down"]);
}

#[test]
fn snapshot_restore_roundtrip() {
    let mut p = chain();
    let fresh = p.snapshot();
    assert_eq!(fresh.control.states, vec![0, 0]);
    let s0 = p.snapshot();
    let r1 = p.react_names(&["GO"]).unwrap();
    p.restore(&s0).unwrap();
    assert_eq!(p.snapshot(), s0);
    let r2 = p.react_names(&["GO"]).unwrap();
    assert_eq!(r1, r2);

    let mut other = toggle();
    assert_eq!(other.restore(&s0).unwrap_err(), KernelError::IncompatibleSnapshot);
}

#[test]
fn toggle_enumerates_two_global_states() {
    let mut p = toggle();
    let mut seen = std::collections::BTreeSet::new();
    let mut frontier = vec![p.control_state()];
    while let Some(s) = frontier.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        for letter in [&[][..], &["tick"][..]] {
            p.restore_control(&s).unwrap();
            p.react_names(letter).unwrap();
            frontier.push(p.control_state());
        }
    }
    assert_eq!(seen.len(), 2);
}

// Random programs over 3 inputs and 5 locals, each state with one guarded
// transition and a fallback, so they are deterministic by construction.
#[derive(Clone, Debug)]
enum Atom {
    Input(usize),
    Local(usize),
    PreLocal(usize),
    NotInput(usize),
}

fn atom() -> impl Strategy<Value = Atom> {
    prop_oneof![
        (0..3usize).prop_map(Atom::Input),
        (0..5usize).prop_map(Atom::Local),
        (0..5usize).prop_map(Atom::PreLocal),
        (0..3usize).prop_map(Atom::NotInput),
    ]
}

fn guard_of(atoms: &[Atom]) -> Guard {
    Guard::and(atoms.iter().map(|a| match a {
        Atom::Input(i) => Guard::present(format!("I{i}")),
        Atom::Local(i) => Guard::present(format!("L{i}")),
        Atom::PreLocal(i) => Guard::pre(format!("L{i}")),
        Atom::NotInput(i) => Guard::absent(format!("I{i}")),
    }))
}

type StateSpec = (Vec<Atom>, Vec<usize>, usize);

fn program_strategy() -> impl Strategy<Value = Program> {
    let state = (
        prop::collection::vec(atom(), 1..3),
        prop::collection::vec(0..5usize, 0..3),
        0..3usize,
    );
    prop::collection::vec(prop::collection::vec(state, 1..4), 1..5).prop_map(|auts: Vec<Vec<StateSpec>>| {
        let mut signals: Vec<SignalDecl> = (0..3).map(|i| SignalDecl::input(format!("I{i}"))).collect();
        signals.extend((0..5).map(|i| SignalDecl::local(format!("L{i}"))));
        let automata = auts
            .iter()
            .enumerate()
            .map(|(k, states)| {
                let n = states.len();
                let mut a = ControlAutomaton::new(format!("a{k}"), "s0");
                for (s, (atoms, emits, to)) in states.iter().enumerate() {
                    let emits = emits.iter().map(|e| Emission::pure(format!("L{e}"))).collect();
                    a.add_transition(
                        format!("s{s}"),
                        guard_of(atoms),
                        emits,
                        Target::Go(format!("s{}", to % n)),
                    );
                    a.set_otherwise(format!("s{s}"), Target::Go(format!("s{}", (s + 1) % n)));
                }
                a.suspendable()
            })
            .collect();
        Program::declare(ProgramSpec {
            signals,
            automata,
            abort: None,
        })
        .unwrap()
    })
}

fn letters() -> impl Strategy<Value = Vec<Vec<bool>>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 1..12)
}

fn inputs(p: &Program, l: &[bool]) -> Vec<SignalEvent> {
    (0..3)
        .filter(|i| l[*i])
        .map(|i| p.event(&format!("I{i}")).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn react_is_deterministic(p in program_strategy(), run in letters()) {
        let mut a = p.clone();
        let mut b = p;
        for l in &run {
            let before = a.snapshot();
            let ra = a.react(&inputs(&a, l)).unwrap();
            let after = a.snapshot();
            a.restore(&before).unwrap();
            prop_assert_eq!(&a.react(&inputs(&a, l)).unwrap(), &ra);
            prop_assert_eq!(a.snapshot(), after.clone());
            let rb = b.react(&inputs(&b, l)).unwrap();
            prop_assert_eq!(ra, rb);
            prop_assert_eq!(b.snapshot(), after);
        }
    }

    #[test]
    fn micro_steps_within_cap(p in program_strategy(), run in letters()) {
        let mut p = p;
        for l in &run {
            let r = p.react(&inputs(&p, l)).unwrap();
            prop_assert!(r.micro_steps <= p.micro_step_cap());
            prop_assert!(r.micro_steps <= p.automaton_count());
        }
    }

    #[test]
    fn snapshot_restore_is_a_fixed_point(p in program_strategy(), run in letters()) {
        let mut p = p;
        for l in &run {
            p.react(&inputs(&p, l)).unwrap();
            let s = p.snapshot();
            p.restore(&s).unwrap();
            prop_assert_eq!(p.snapshot(), s);
        }
    }

    #[test]
    fn suspended_automaton_is_constant(p in program_strategy(), run in letters(), pick in 0..4usize) {
        let mut p = p;
        let k = pick % p.automaton_count();
        p.suspend(k).unwrap();
        let held = p.control_state().states[k];
        for l in &run {
            p.react(&inputs(&p, l)).unwrap();
            prop_assert_eq!(p.control_state().states[k], held);
        }
    }
}
