//! Transition systems: explicit finite ones and symbolic ones over ℚ.
//!
//! Explicit systems are generic in the state type; the concrete `State`
//! (a vector of rationals indexed by `vars`) is what predicates and
//! ranking templates are evaluated on.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Debug;

use num_traits::Zero;
use thiserror::Error;

use crate::lra::{self, fmt_rational, q, Assignment, Formula, Rational, Sat};
use crate::sexp::{self, ParseError, Sexp};

pub type State = Vec<Rational>;

pub fn state(vals: &[i64]) -> State {
    vals.iter().map(|v| q(*v)).collect()
}

pub fn fmt_state(s: &State) -> String {
    if s.len() == 1 {
        fmt_rational(&s[0])
    } else {
        format!("({})", s.iter().map(fmt_rational).collect::<Vec<_>>().join(" "))
    }
}

pub fn fmt_trace(t: &[State]) -> String {
    t.iter().map(fmt_state).collect::<Vec<_>>().join(" -> ")
}

pub trait StateLike: Clone + Ord + Debug {}
impl<T: Clone + Ord + Debug> StateLike for T {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TsError {
    #[error("{0} is not a declared state")]
    NotContained(String),
    #[error("symbolic system paired with a predicate that has no symbolic decision: {0}")]
    UndecidableCombination(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitTS<S: StateLike = State> {
    vars: Vec<String>,
    states: Vec<S>,
    init: BTreeSet<S>,
    trans: BTreeSet<(S, S)>,
    bad: BTreeSet<S>,
    succ: BTreeMap<S, Vec<S>>,
}

impl<S: StateLike> ExplicitTS<S> {
    pub fn new(
        vars: Vec<String>,
        states: impl IntoIterator<Item = S>,
        init: impl IntoIterator<Item = S>,
        trans: impl IntoIterator<Item = (S, S)>,
        bad: impl IntoIterator<Item = S>,
    ) -> Result<Self, TsError> {
        let mut seen = BTreeSet::new();
        let states: Vec<S> = states.into_iter().filter(|s| seen.insert(s.clone())).collect();
        let check = |s: &S| {
            if seen.contains(s) {
                Ok(())
            } else {
                Err(TsError::NotContained(format!("{s:?}")))
            }
        };
        let init: BTreeSet<S> = init.into_iter().collect();
        let bad: BTreeSet<S> = bad.into_iter().collect();
        let trans: BTreeSet<(S, S)> = trans.into_iter().collect();
        for s in init.iter().chain(bad.iter()) {
            check(s)?;
        }
        let mut succ: BTreeMap<S, Vec<S>> = BTreeMap::new();
        for (a, b) in &trans {
            check(a)?;
            check(b)?;
            succ.entry(a.clone()).or_default().push(b.clone());
        }
        Ok(ExplicitTS { vars, states, init, trans, bad, succ })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }
    pub fn states(&self) -> &[S] {
        &self.states
    }
    pub fn init(&self) -> &BTreeSet<S> {
        &self.init
    }
    pub fn trans(&self) -> &BTreeSet<(S, S)> {
        &self.trans
    }
    pub fn bad(&self) -> &BTreeSet<S> {
        &self.bad
    }

    pub fn successors(&self, s: &S) -> &[S] {
        self.succ.get(s).map_or(&[], |v| v.as_slice())
    }

    pub fn contains(&self, s: &S) -> bool {
        self.states.contains(s)
    }

    /// Initial states in declaration order.
    pub fn init_ordered(&self) -> Vec<S> {
        self.states.iter().filter(|s| self.init.contains(s)).cloned().collect()
    }

    /// States reachable from init, in BFS discovery order.
    pub fn reachable(&self) -> Vec<S> {
        let mut seen: BTreeSet<S> = BTreeSet::new();
        let mut order = Vec::new();
        let mut queue: VecDeque<S> = VecDeque::new();
        for s in self.init_ordered() {
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            order.push(s.clone());
            for t in self.successors(&s) {
                if seen.insert(t.clone()) {
                    queue.push_back(t.clone());
                }
            }
        }
        order
    }

    pub fn is_error_trace(&self, t: &[S]) -> bool {
        !t.is_empty()
            && self.init.contains(&t[0])
            && self.bad.contains(t.last().unwrap())
            && t.windows(2).all(|w| self.trans.contains(&(w[0].clone(), w[1].clone())))
    }

    /// Inductiveness of the state set `{s | p(s)}`.
    ///
    /// Consecution is checked on transitions out of reachable states first
    /// (BFS order), so the reported witness is the one nearest to init.
    pub fn check_inductive(&self, p: impl Fn(&S) -> bool) -> InvCheck<S> {
        for s in self.init_ordered() {
            if !p(&s) {
                return InvCheck::Violation(ViolationKind::Initiation, Witness::State(s));
            }
        }
        let reach = self.reachable();
        let reach_set: BTreeSet<&S> = reach.iter().collect();
        let rest = self.states.iter().filter(|s| !reach_set.contains(s));
        for s in reach.iter().chain(rest) {
            if !p(s) {
                continue;
            }
            for t in self.successors(s) {
                if !p(t) {
                    return InvCheck::Violation(ViolationKind::Consecution, Witness::Transition(s.clone(), t.clone()));
                }
            }
        }
        for s in &self.states {
            if self.bad.contains(s) && p(s) {
                return InvCheck::Violation(ViolationKind::Safety, Witness::State(s.clone()));
            }
        }
        InvCheck::Inductive
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reach<S> {
    Safe,
    Trace(Vec<S>),
}

/// Shortest path from `inits` to a state satisfying `is_bad`.
pub fn bfs_error<S: StateLike>(
    inits: Vec<S>,
    mut succ: impl FnMut(&S) -> Vec<S>,
    is_bad: impl Fn(&S) -> bool,
) -> Reach<S> {
    let mut parent: BTreeMap<S, Option<S>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for s in inits {
        if !parent.contains_key(&s) {
            parent.insert(s.clone(), None);
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        if is_bad(&s) {
            let mut path = vec![s.clone()];
            let mut cur = s;
            while let Some(Some(p)) = parent.get(&cur) {
                path.push(p.clone());
                cur = p.clone();
            }
            path.reverse();
            return Reach::Trace(path);
        }
        for t in succ(&s) {
            if !parent.contains_key(&t) {
                parent.insert(t.clone(), Some(s.clone()));
                queue.push_back(t);
            }
        }
    }
    Reach::Safe
}

pub fn explicit_error_search<S: StateLike>(ts: &ExplicitTS<S>) -> Reach<S> {
    bfs_error(ts.init_ordered(), |s| ts.successors(s).to_vec(), |s| ts.bad.contains(s))
}

/// The subsystem on `x ∩ states`.
pub fn restrict<S: StateLike>(ts: &ExplicitTS<S>, x: &BTreeSet<S>) -> ExplicitTS<S> {
    let keep: Vec<S> = ts.states.iter().filter(|s| x.contains(s)).cloned().collect();
    ExplicitTS::new(
        ts.vars.clone(),
        keep.clone(),
        ts.init.iter().filter(|s| x.contains(s)).cloned(),
        ts.trans.iter().filter(|(a, b)| x.contains(a) && x.contains(b)).cloned(),
        ts.bad.iter().filter(|s| x.contains(s)).cloned(),
    )
    .expect("restriction of a valid system is valid")
}

/// A finite sample `(I', T', B')` of a system.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sample<S: StateLike = State> {
    pub init: BTreeSet<S>,
    pub trans: BTreeSet<(S, S)>,
    pub bad: BTreeSet<S>,
}

impl<S: StateLike> Default for Sample<S> {
    fn default() -> Self {
        Sample { init: BTreeSet::new(), trans: BTreeSet::new(), bad: BTreeSet::new() }
    }
}

impl<S: StateLike> Sample<S> {
    pub fn join(&self, other: &Sample<S>) -> Sample<S> {
        Sample {
            init: self.init.union(&other.init).cloned().collect(),
            trans: self.trans.union(&other.trans).cloned().collect(),
            bad: self.bad.union(&other.bad).cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &Sample<S>) -> bool {
        self.init.is_subset(&other.init) && self.trans.is_subset(&other.trans) && self.bad.is_subset(&other.bad)
    }

    pub fn len(&self) -> usize {
        self.init.len() + self.trans.len() + self.bad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every state mentioned by the sample.
    pub fn states(&self) -> BTreeSet<S> {
        let mut s: BTreeSet<S> = self.init.union(&self.bad).cloned().collect();
        for (a, b) in &self.trans {
            s.insert(a.clone());
            s.insert(b.clone());
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Initiation,
    Consecution,
    Safety,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::Initiation => "initiation",
            ViolationKind::Consecution => "consecution",
            ViolationKind::Safety => "safety",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness<S> {
    State(S),
    Transition(S, S),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvCheck<S> {
    Inductive,
    Violation(ViolationKind, Witness<S>),
}

impl<S> InvCheck<S> {
    pub fn is_inductive(&self) -> bool {
        matches!(self, InvCheck::Inductive)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredBody {
    Explicit(BTreeSet<State>),
    Symbolic(Formula),
}

/// A named state predicate with its stratum in a hypothesis pool.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub name: String,
    pub stratum: usize,
    pub body: PredBody,
}

impl Predicate {
    pub fn symbolic(f: Formula, stratum: usize) -> Self {
        Predicate { name: f.to_string(), stratum, body: PredBody::Symbolic(f) }
    }

    pub fn explicit(name: &str, states: BTreeSet<State>, stratum: usize) -> Self {
        Predicate { name: name.to_string(), stratum, body: PredBody::Explicit(states) }
    }

    /// Evaluation on a concrete state; ill-sorted `mod` counts as false.
    pub fn holds(&self, vars: &[String], s: &State) -> bool {
        match &self.body {
            PredBody::Explicit(set) => set.contains(s),
            PredBody::Symbolic(f) => f.eval(&assign(vars, s)).unwrap_or(false),
        }
    }

    /// Usable by the symbolic (FM) checks: a formula without `mod`.
    pub fn is_linear(&self) -> bool {
        match &self.body {
            PredBody::Explicit(_) => false,
            PredBody::Symbolic(f) => f.atoms().iter().all(|a| !a.term.has_mod()),
        }
    }

    pub fn formula(&self) -> Option<&Formula> {
        match &self.body {
            PredBody::Symbolic(f) => Some(f),
            PredBody::Explicit(_) => None,
        }
    }
}

pub fn assign(vars: &[String], s: &State) -> Assignment {
    vars.iter().cloned().zip(s.iter().cloned()).collect()
}

pub fn primed(x: &str) -> String {
    format!("{x}'")
}

/// Symbolic system over ℚ; `trans` mentions `x` and `x'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicTS {
    pub vars: Vec<String>,
    pub init: Formula,
    pub trans: Formula,
    pub bad: Formula,
    /// Integer box `[-d, d]^n` used when a check needs an explicit truncation.
    pub domain: Option<i64>,
}

impl SymbolicTS {
    pub fn prime(&self, f: &Formula) -> Formula {
        let mut g = f.clone();
        for v in &self.vars {
            g = g.rename(v, &primed(v));
        }
        g
    }

    /// `f` with every variable `x` renamed to `x@i`.
    pub fn at_step(&self, f: &Formula, i: usize) -> Formula {
        let mut g = f.clone();
        for v in &self.vars {
            g = g.rename(v, &format!("{v}@{i}"));
        }
        g
    }

    /// `trans` from step `i` to step `i+1`.
    pub fn trans_at(&self, i: usize) -> Formula {
        let mut g = self.trans.clone();
        for v in &self.vars {
            g = g.rename(v, &format!("{v}@{i}"));
        }
        for v in &self.vars {
            g = g.rename(&primed(v), &format!("{v}@{}", i + 1));
        }
        g
    }

    pub fn state_from_model(&self, m: &Assignment, step: Option<usize>) -> State {
        self.vars
            .iter()
            .map(|v| {
                let key = match step {
                    Some(i) => format!("{v}@{i}"),
                    None => v.clone(),
                };
                m.get(&key).cloned().unwrap_or_else(Rational::zero)
            })
            .collect()
    }

    pub fn is_init(&self, s: &State) -> bool {
        self.init.eval(&assign(&self.vars, s)).unwrap_or(false)
    }

    pub fn is_bad(&self, s: &State) -> bool {
        self.bad.eval(&assign(&self.vars, s)).unwrap_or(false)
    }

    pub fn has_trans(&self, s: &State, t: &State) -> bool {
        let mut a = assign(&self.vars, s);
        for (v, x) in self.vars.iter().zip(t) {
            a.insert(primed(v), x.clone());
        }
        self.trans.eval(&a).unwrap_or(false)
    }

    /// Integer points of `[-d, d]^n` with the transitions among them.
    pub fn to_explicit(&self, d: i64) -> ExplicitTS {
        let mut states: Vec<State> = vec![vec![]];
        for _ in &self.vars {
            states = states.iter().flat_map(|s| (-d..=d).map(move |v| [s.clone(), vec![q(v)]].concat())).collect();
        }
        let init: Vec<State> = states.iter().filter(|s| self.is_init(s)).cloned().collect();
        let bad: Vec<State> = states.iter().filter(|s| self.is_bad(s)).cloned().collect();
        let mut trans = Vec::new();
        for s in &states {
            for t in &states {
                if self.has_trans(s, t) {
                    trans.push((s.clone(), t.clone()));
                }
            }
        }
        ExplicitTS::new(self.vars.clone(), states, init, trans, bad).expect("grid is closed")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum System {
    Explicit(ExplicitTS),
    Symbolic(SymbolicTS),
}

impl System {
    pub fn vars(&self) -> &[String] {
        match self {
            System::Explicit(e) => e.vars(),
            System::Symbolic(s) => &s.vars,
        }
    }

    pub fn is_init(&self, s: &State) -> bool {
        match self {
            System::Explicit(e) => e.init.contains(s),
            System::Symbolic(y) => y.is_init(s),
        }
    }

    pub fn is_bad(&self, s: &State) -> bool {
        match self {
            System::Explicit(e) => e.bad.contains(s),
            System::Symbolic(y) => y.is_bad(s),
        }
    }

    pub fn has_trans(&self, s: &State, t: &State) -> bool {
        match self {
            System::Explicit(e) => e.trans.contains(&(s.clone(), t.clone())),
            System::Symbolic(y) => y.has_trans(s, t),
        }
    }

    pub fn is_error_trace(&self, t: &[State]) -> bool {
        !t.is_empty()
            && self.is_init(&t[0])
            && self.is_bad(t.last().unwrap())
            && t.windows(2).all(|w| self.has_trans(&w[0], &w[1]))
    }

    /// Componentwise containment of a sample in `(I, →, B)`.
    pub fn contains_sample(&self, s: &Sample) -> bool {
        s.init.iter().all(|x| self.is_init(x))
            && s.bad.iter().all(|x| self.is_bad(x))
            && s.trans.iter().all(|(a, b)| self.has_trans(a, b))
    }
}

/// Safe inductive invariant check for the conjunction of `preds`.
///
/// Symbolic systems use `qf_sat`; predicates without a symbolic decision
/// (explicit sets, `mod`) fall back to the integer truncation in `domain`,
/// which can only refute: no violation there is reported as an error.
pub fn invariant_check(sys: &System, preds: &[Predicate]) -> Result<InvCheck<State>, TsError> {
    match sys {
        System::Explicit(e) => Ok(e.check_inductive(|s| preds.iter().all(|p| p.holds(e.vars(), s)))),
        System::Symbolic(y) => {
            if let Some(p) = preds.iter().find(|p| !p.is_linear()) {
                let Some(d) = y.domain else {
                    return Err(TsError::UndecidableCombination(p.name.clone()));
                };
                let e = y.to_explicit(d);
                let r = e.check_inductive(|s| preds.iter().all(|p| p.holds(e.vars(), s)));
                return match r {
                    InvCheck::Inductive => Err(TsError::UndecidableCombination(format!(
                        "{} (no violation within [-{d},{d}])",
                        p.name
                    ))),
                    v => Ok(v),
                };
            }
            let conj = Formula::and(preds.iter().map(|p| p.formula().unwrap().clone()).collect());
            if let Sat::Sat(m) = lra::qf_sat(&Formula::and(vec![y.init.clone(), conj.negate()])) {
                return Ok(InvCheck::Violation(ViolationKind::Initiation, Witness::State(y.state_from_model(&m, None))));
            }
            let step = Formula::and(vec![conj.clone(), y.trans.clone(), y.prime(&conj).negate()]);
            if let Sat::Sat(m) = lra::qf_sat(&step) {
                let s = y.state_from_model(&m, None);
                let t: State = y.vars.iter().map(|v| m.get(&primed(v)).cloned().unwrap_or_else(Rational::zero)).collect();
                return Ok(InvCheck::Violation(ViolationKind::Consecution, Witness::Transition(s, t)));
            }
            if let Sat::Sat(m) = lra::qf_sat(&Formula::and(vec![conj, y.bad.clone()])) {
                return Ok(InvCheck::Violation(ViolationKind::Safety, Witness::State(y.state_from_model(&m, None))));
            }
            Ok(InvCheck::Inductive)
        }
    }
}

/// A ranking function on states.
pub trait Rank<S> {
    fn rank(&self, s: &S) -> Rational;
}

impl<S, F: Fn(&S) -> Rational> Rank<S> for F {
    fn rank(&self, s: &S) -> Rational {
        self(s)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum ProductWitness<'a, R> {
    Single(&'a R),
    Dwf(&'a [R]),
}

/// The product `T^(r)` (single) or `T^(R)` (disjunctive), generated on the fly.
pub struct RankingProduct<'a, S: StateLike, R> {
    ts: &'a ExplicitTS<S>,
    witness: ProductWitness<'a, R>,
}

pub fn ranking_product<'a, S: StateLike, R: Rank<S>>(
    ts: &'a ExplicitTS<S>,
    witness: ProductWitness<'a, R>,
) -> RankingProduct<'a, S, R> {
    RankingProduct { ts, witness }
}

impl<S: StateLike, R: Rank<S>> RankingProduct<'_, S, R> {
    pub fn init(&self) -> Vec<(S, S)> {
        let mut v = Vec::new();
        for s in self.ts.init_ordered() {
            for t in self.ts.successors(&s) {
                v.push((s.clone(), t.clone()));
            }
        }
        v
    }

    pub fn successors(&self, p: &(S, S)) -> Vec<(S, S)> {
        let (a, b) = p;
        let mut v = Vec::new();
        for c in self.ts.successors(b) {
            match self.witness {
                ProductWitness::Single(_) => v.push((b.clone(), c.clone())),
                ProductWitness::Dwf(_) => {
                    // The previous state first, so the shortest violation found is adjacent when one exists.
                    v.push((b.clone(), c.clone()));
                    if a != b {
                        v.push((a.clone(), c.clone()));
                    }
                }
            }
        }
        v
    }

    /// `s ≻ s'` under the witness.
    pub fn decreases(&self, s: &S, t: &S) -> bool {
        match self.witness {
            ProductWitness::Single(r) => r.rank(s) > r.rank(t),
            ProductWitness::Dwf(rs) => rs.iter().any(|r| r.rank(s) > r.rank(t)),
        }
    }

    pub fn is_bad(&self, p: &(S, S)) -> bool {
        !self.decreases(&p.0, &p.1)
    }

    pub fn search(&self) -> Reach<(S, S)> {
        bfs_error(self.init(), |p| self.successors(p), |p| self.is_bad(p))
    }

    /// The full product over `S × S`.
    pub fn materialize(&self) -> ExplicitTS<(S, S)> {
        let st = self.ts.states();
        let pairs: Vec<(S, S)> = st.iter().flat_map(|a| st.iter().map(move |b| (a.clone(), b.clone()))).collect();
        let trans: Vec<((S, S), (S, S))> =
            pairs.iter().flat_map(|p| self.successors(p).into_iter().map(move |n| (p.clone(), n))).collect();
        let bad: Vec<(S, S)> = pairs.iter().filter(|p| self.is_bad(p)).cloned().collect();
        ExplicitTS::new(vec![], pairs, self.init(), trans, bad).expect("product is closed")
    }
}

// ---------------------------------------------------------------- text format

pub(crate) fn keyword_map(items: &[Sexp]) -> Result<BTreeMap<String, &Sexp>, ParseError> {
    let mut m = BTreeMap::new();
    let mut i = 1;
    while i < items.len() {
        let k = items[i].expect_atom("keyword")?;
        if !k.starts_with(':') {
            return Err(ParseError::new(items[i].pos(), format!("expected keyword, found '{k}'")));
        }
        let v = items.get(i + 1).ok_or_else(|| ParseError::new(items[i].pos(), format!("missing value for {k}")))?;
        m.insert(k[1..].to_string(), v);
        i += 2;
    }
    Ok(m)
}

pub fn state_of(e: &Sexp) -> Result<State, ParseError> {
    let num = |a: &Sexp| {
        a.as_atom()
            .and_then(lra::parse_rational)
            .ok_or_else(|| ParseError::new(a.pos(), format!("expected a number, found '{a}'")))
    };
    match e {
        Sexp::Atom(..) => Ok(vec![num(e)?]),
        Sexp::List(v, _) => v.iter().map(num).collect(),
    }
}

pub(crate) fn states_of(e: &Sexp) -> Result<Vec<State>, ParseError> {
    e.expect_list("state list")?.iter().map(state_of).collect()
}

/// `(system :vars (x) :init … :trans … :bad …)` or
/// `(system :states (…) :init (…) :trans ((a b) …) :bad (…))`.
pub fn system_of(e: &Sexp) -> Result<System, ParseError> {
    if e.head() != Some("system") {
        return Err(ParseError::new(e.pos(), "expected (system ...)"));
    }
    let kw = keyword_map(e.as_list().unwrap())?;
    let get = |k: &str| kw.get(k).copied().ok_or_else(|| ParseError::new(e.pos(), format!("missing :{k}")));
    if let Some(st) = kw.get("states") {
        let states = states_of(st)?;
        let dim = states.first().map_or(1, |s| s.len());
        let vars = match kw.get("vars") {
            Some(v) => lra::binder_vars(v)?,
            None if dim == 1 => vec!["x".to_string()],
            None => (0..dim).map(|i| format!("x{i}")).collect(),
        };
        let init = states_of(get("init")?)?;
        let bad = match kw.get("bad") {
            Some(b) => states_of(b)?,
            None => vec![],
        };
        let mut trans = Vec::new();
        for p in get("trans")?.expect_list("transition list")? {
            let pr = p.expect_list("transition")?;
            if pr.len() != 2 {
                return Err(ParseError::new(p.pos(), "transition must be a pair"));
            }
            trans.push((state_of(&pr[0])?, state_of(&pr[1])?));
        }
        let ts = ExplicitTS::new(vars, states, init, trans, bad).map_err(|err| ParseError::new(e.pos(), err.to_string()))?;
        return Ok(System::Explicit(ts));
    }
    let vars = lra::binder_vars(get("vars")?)?;
    let f = |k: &str| -> Result<Formula, ParseError> {
        match kw.get(k) {
            Some(s) => lra::formula_of(s),
            None => Ok(Formula::False),
        }
    };
    let domain = match kw.get("domain") {
        Some(d) => Some(
            d.as_atom()
                .and_then(|s| s.parse::<i64>().ok())
                .ok_or_else(|| ParseError::new(d.pos(), ":domain must be an integer"))?,
        ),
        None => None,
    };
    let sys = SymbolicTS { vars, init: f("init")?, trans: f("trans")?, bad: f("bad")?, domain };
    let allowed: BTreeSet<String> = sys.vars.iter().flat_map(|v| [v.clone(), primed(v)]).collect();
    for (k, g) in [("init", &sys.init), ("bad", &sys.bad)] {
        if let Some(v) = g.vars().into_iter().find(|v| !sys.vars.contains(v)) {
            return Err(ParseError::new(get(k)?.pos(), format!("undeclared variable {v}")));
        }
    }
    if let Some(v) = sys.trans.vars().into_iter().find(|v| !allowed.contains(v)) {
        return Err(ParseError::new(get("trans")?.pos(), format!("undeclared variable {v}")));
    }
    Ok(System::Symbolic(sys))
}

pub fn parse_system(src: &str) -> Result<System, ParseError> {
    system_of(&sexp::parse_one(src)?)
}

/// Predicate pool file: `(pool (0 p₁ p₂ …) (1 …))`, one list per stratum.
/// A predicate is a formula or `(set name s₁ s₂ …)` for an explicit state set.
pub fn pool_of(e: &Sexp) -> Result<Vec<Predicate>, ParseError> {
    if e.head() != Some("pool") {
        return Err(ParseError::new(e.pos(), "expected (pool ...)"));
    }
    let mut out = Vec::new();
    for stratum in &e.as_list().unwrap()[1..] {
        let items = stratum.expect_list("stratum")?;
        let n: usize = items
            .first()
            .and_then(|a| a.as_atom())
            .and_then(|a| a.parse().ok())
            .ok_or_else(|| ParseError::new(stratum.pos(), "stratum must start with its index"))?;
        for p in &items[1..] {
            if p.head() == Some("set") {
                let v = p.as_list().unwrap();
                let name = v.get(1).map(|s| s.to_string()).unwrap_or_default();
                let states = v[2..].iter().map(state_of).collect::<Result<BTreeSet<_>, _>>()?;
                out.push(Predicate::explicit(&name, states, n));
            } else {
                let mut pr = Predicate::symbolic(lra::formula_of(p)?, n);
                pr.name = p.to_string();
                out.push(pr);
            }
        }
    }
    Ok(out)
}

pub fn parse_pool(src: &str) -> Result<Vec<Predicate>, ParseError> {
    pool_of(&sexp::parse_one(src)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lra::parse_formula;

    pub(crate) fn t0() -> System {
        parse_system("(system :vars (x) :init (= x 0) :trans (= x' (+ x 1)) :bad (= x -3) :domain 5)").unwrap()
    }

    fn t0_bounded(init: i64) -> ExplicitTS {
        let states: Vec<State> = (-5..=5).map(|v| state(&[v])).collect();
        let trans = (-5..5).map(|v| (state(&[v]), state(&[v + 1])));
        ExplicitTS::new(vec!["x".into()], states, [state(&[init])], trans, [state(&[-3])]).unwrap()
    }

    fn pred(src: &str) -> Predicate {
        Predicate::symbolic(parse_formula(src).unwrap(), 0)
    }

    #[test]
    fn error_search_examples() {
        assert_eq!(explicit_error_search(&t0_bounded(0)), Reach::Safe);
        assert_eq!(
            explicit_error_search(&t0_bounded(-5)),
            Reach::Trace(vec![state(&[-5]), state(&[-4]), state(&[-3])])
        );
        let empty = ExplicitTS::new(vec![], [state(&[0])], [], [], [state(&[0])]).unwrap();
        assert_eq!(explicit_error_search(&empty), Reach::Safe);
    }

    #[test]
    fn invariant_examples() {
        let t0 = t0();
        assert!(invariant_check(&t0, &[pred("(>= x 0)")]).unwrap().is_inductive());
        assert!(invariant_check(&t0, &[pred("(> x -2)")]).unwrap().is_inductive());
        assert_eq!(
            invariant_check(&t0, &[pred("(= (mod x 2) 0)")]).unwrap(),
            InvCheck::Violation(ViolationKind::Consecution, Witness::Transition(state(&[0]), state(&[1])))
        );
        match invariant_check(&t0, &[pred("(<= x 0)")]).unwrap() {
            InvCheck::Violation(ViolationKind::Consecution, Witness::Transition(s, t)) => {
                assert!(s[0] <= q(0) && t[0] > q(0));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            invariant_check(&t0, &[pred("(< x 5)")]).unwrap(),
            InvCheck::Violation(ViolationKind::Consecution, _)
        ));
        assert!(matches!(
            invariant_check(&t0, &[pred("true")]).unwrap(),
            InvCheck::Violation(ViolationKind::Safety, _)
        ));
    }

    #[test]
    fn mod_without_domain_is_undecidable() {
        let System::Symbolic(mut y) = t0() else { unreachable!() };
        y.domain = None;
        let r = invariant_check(&System::Symbolic(y), &[pred("(= (mod x 2) 0)")]);
        assert!(matches!(r, Err(TsError::UndecidableCombination(_))));
    }

    #[test]
    fn restrict_examples() {
        let ts = t0_bounded(0);
        let x: BTreeSet<State> = [0, 1, -3].iter().map(|v| state(&[*v])).collect();
        let r = restrict(&ts, &x);
        assert_eq!(r.trans().len(), 1);
        assert!(r.trans().contains(&(state(&[0]), state(&[1]))));
        assert_eq!(r.bad().len(), 1);
        assert_eq!(explicit_error_search(&r), Reach::Safe);
        let all: BTreeSet<State> = ts.states().iter().cloned().collect();
        assert_eq!(restrict(&ts, &all), ts);
        assert!(restrict(&ts, &BTreeSet::new()).states().is_empty());
    }

    fn countdown() -> ExplicitTS {
        let states: Vec<State> = (0..=3).map(|v| state(&[v])).collect();
        let trans = (1..=3).map(|v| (state(&[v]), state(&[v - 1])));
        ExplicitTS::new(vec!["x".into()], states, [state(&[3])], trans, []).unwrap()
    }

    #[test]
    fn ranking_product_examples() {
        let r = |s: &State| s[0].clone();
        let cd = countdown();
        assert_eq!(ranking_product(&cd, ProductWitness::Single(&r)).search(), Reach::Safe);
        let rs = [r];
        assert_eq!(ranking_product(&cd, ProductWitness::Dwf(&rs)).search(), Reach::Safe);
        let lp = ExplicitTS::new(vec!["x".into()], [state(&[0])], [state(&[0])], [(state(&[0]), state(&[0]))], [])
            .unwrap();
        assert_eq!(
            ranking_product(&lp, ProductWitness::Single(&r)).search(),
            Reach::Trace(vec![(state(&[0]), state(&[0]))])
        );
    }

    #[test]
    fn materialized_product_agrees_with_lazy_search() {
        let r = |s: &State| s[0].clone();
        let cd = countdown();
        let p = ranking_product(&cd, ProductWitness::Single(&r));
        assert_eq!(explicit_error_search(&p.materialize()), Reach::Safe);
    }

    #[test]
    fn parses_explicit_system_and_pool() {
        let s = parse_system("(system :states (0 1 2) :init (0) :trans ((0 1) (1 2)) :bad (2))").unwrap();
        let System::Explicit(e) = s else { panic!() };
        assert_eq!(
            explicit_error_search(&e),
            Reach::Trace(vec![state(&[0]), state(&[1]), state(&[2])])
        );
        let pool = parse_pool("(pool (0 (>= x 0) (set evens 0 2)) (1 (<= x 1)))").unwrap();
        assert_eq!(pool.len(), 3);
        assert_eq!(pool[2].stratum, 1);
        assert!(pool[1].holds(&["x".into()], &state(&[2])));
        assert!(parse_system("(system :states (0) :init (1) :trans ())").is_err());
        assert!(parse_system("(system :vars (x) :init (= y 0) :trans true)").is_err());
    }
}
