use std::collections::BTreeSet;

/// Boolean formula over signal presence.
///
/// `Present(s)` reads the current tick, `Pre(s)` the previous one. A guard is
/// *monotone* when no current-tick presence of an automaton-driven signal sits
/// under a `Not`; inputs are known before the first micro-step, so negating
/// them keeps the guard monotone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Guard {
    True,
    Present(String),
    Pre(String),
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    pub fn present(name: impl Into<String>) -> Guard {
        Guard::Present(name.into())
    }

    pub fn pre(name: impl Into<String>) -> Guard {
        Guard::Pre(name.into())
    }

    pub fn absent(name: impl Into<String>) -> Guard {
        Guard::Not(Box::new(Guard::Present(name.into())))
    }

    pub fn not_pre(name: impl Into<String>) -> Guard {
        Guard::Not(Box::new(Guard::Pre(name.into())))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(g: Guard) -> Guard {
        Guard::Not(Box::new(g))
    }

    pub fn and(gs: impl IntoIterator<Item = Guard>) -> Guard {
        let v: Vec<Guard> = gs.into_iter().collect();
        match v.len() {
            0 => Guard::True,
            1 => v.into_iter().next().unwrap(),
            _ => Guard::And(v),
        }
    }

    pub fn or(gs: impl IntoIterator<Item = Guard>) -> Guard {
        let v: Vec<Guard> = gs.into_iter().collect();
        match v.len() {
            1 => v.into_iter().next().unwrap(),
            _ => Guard::Or(v),
        }
    }

    pub fn names(&self, out: &mut BTreeSet<String>) {
        match self {
            Guard::True => {}
            Guard::Present(s) | Guard::Pre(s) => {
                out.insert(s.clone());
            }
            Guard::Not(g) => g.names(out),
            Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| g.names(out)),
        }
    }
}

/// Guard with signal names resolved to indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum CGuard {
    True,
    Now(u32),
    Pre(u32),
    Not(Box<CGuard>),
    And(Vec<CGuard>),
    Or(Vec<CGuard>),
}

impl CGuard {
    pub(crate) fn compile(g: &Guard, resolve: &mut dyn FnMut(&str) -> Option<u32>) -> Result<CGuard, String> {
        Ok(match g {
            Guard::True => CGuard::True,
            Guard::Present(s) => CGuard::Now(resolve(s).ok_or_else(|| s.clone())?),
            Guard::Pre(s) => CGuard::Pre(resolve(s).ok_or_else(|| s.clone())?),
            Guard::Not(inner) => CGuard::Not(Box::new(CGuard::compile(inner, resolve)?)),
            Guard::And(gs) => CGuard::And(
                gs.iter()
                    .map(|g| CGuard::compile(g, resolve))
                    .collect::<Result<_, _>>()?,
            ),
            Guard::Or(gs) => CGuard::Or(
                gs.iter()
                    .map(|g| CGuard::compile(g, resolve))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    pub(crate) fn eval(&self, now: &[bool], pre: &[bool]) -> bool {
        match self {
            CGuard::True => true,
            CGuard::Now(i) => now[*i as usize],
            CGuard::Pre(i) => pre[*i as usize],
            CGuard::Not(g) => !g.eval(now, pre),
            CGuard::And(gs) => gs.iter().all(|g| g.eval(now, pre)),
            CGuard::Or(gs) => gs.iter().any(|g| g.eval(now, pre)),
        }
    }

    /// True when no current-tick presence of a non-input signal is negated.
    pub(crate) fn is_monotone(&self, is_input: &dyn Fn(u32) -> bool) -> bool {
        fn walk(g: &CGuard, negated: bool, is_input: &dyn Fn(u32) -> bool) -> bool {
            match g {
                CGuard::True | CGuard::Pre(_) => true,
                CGuard::Now(i) => !negated || is_input(*i),
                CGuard::Not(inner) => walk(inner, !negated, is_input),
                CGuard::And(gs) | CGuard::Or(gs) => gs.iter().all(|g| walk(g, negated, is_input)),
            }
        }
        walk(self, false, is_input)
    }

    /// Atoms as (signal, is_pre) pairs.
    pub(crate) fn atoms(&self, out: &mut BTreeSet<(u32, bool)>) {
        match self {
            CGuard::True => {}
            CGuard::Now(i) => {
                out.insert((*i, false));
            }
            CGuard::Pre(i) => {
                out.insert((*i, true));
            }
            CGuard::Not(g) => g.atoms(out),
            CGuard::And(gs) | CGuard::Or(gs) => gs.iter().for_each(|g| g.atoms(out)),
        }
    }

    pub(crate) fn pre_signals(&self, out: &mut BTreeSet<u32>) {
        let mut atoms = BTreeSet::new();
        self.atoms(&mut atoms);
        out.extend(atoms.into_iter().filter(|(_, p)| *p).map(|(s, _)| s));
    }
}

/// Whether two guards can hold under one valuation, by enumerating every
/// assignment of the atoms they mention.
pub(crate) fn jointly_satisfiable(a: &CGuard, b: &CGuard, n_signals: usize) -> bool {
    let mut atoms = BTreeSet::new();
    a.atoms(&mut atoms);
    b.atoms(&mut atoms);
    let atoms: Vec<(u32, bool)> = atoms.into_iter().collect();
    // Guards in practice mention a handful of signals; beyond 20 atoms the
    // conservative answer is "satisfiable".
    if atoms.len() > 20 {
        return true;
    }
    let mut now = vec![false; n_signals];
    let mut pre = vec![false; n_signals];
    for mask in 0u64..(1u64 << atoms.len()) {
        for (bit, (sig, is_pre)) in atoms.iter().enumerate() {
            let v = mask & (1 << bit) != 0;
            if *is_pre {
                pre[*sig as usize] = v;
            } else {
                now[*sig as usize] = v;
            }
        }
        if a.eval(&now, &pre) && b.eval(&now, &pre) {
            return true;
        }
    }
    false
}
