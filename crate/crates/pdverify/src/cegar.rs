//! Predicate-abstraction CEGAR as a primal-dual instance.
//!
//! `X` is the set of concrete state sequences, `Y` the finite subsets of a
//! stratified predicate pool. The dual check is abstract reachability, the
//! primal check is refinement.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Value};

use crate::lagrangian::{
    run_primal_dual, trace_to_json, Check, CheckCtx, EngineConfig, EngineError, Lagrangian, Outcome, Verdict,
};
use crate::lra::{qf_sat, Formula, Sat};
use crate::ts::{
    explicit_error_search, fmt_state, fmt_trace, ExplicitTS, Predicate, Reach, State, SymbolicTS, System,
};

pub type Valuation = Vec<bool>;

/// An abstract error path with one concrete representative per class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractTrace {
    pub reps: Vec<State>,
    pub vals: Vec<Valuation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractResult {
    AbstractSafe,
    Trace(AbstractTrace),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Concretized {
    Feasible(Vec<State>),
    Spurious,
}

/// The stratum of a predicate set: the largest stratum among its members.
pub fn set_stratum(preds: &[Predicate]) -> usize {
    preds.iter().map(|p| p.stratum).max().unwrap_or(0)
}

/// A stratified pool, kept as one flat list; `strata()` groups it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicatePool {
    pub preds: Vec<Predicate>,
}

impl PredicatePool {
    pub fn new(preds: Vec<Predicate>) -> Self {
        let mut seen = BTreeSet::new();
        let preds = preds.into_iter().filter(|p| seen.insert(p.body.clone())).collect();
        PredicatePool { preds }
    }

    pub fn strata(&self) -> Vec<Vec<Predicate>> {
        let top = self.preds.iter().map(|p| p.stratum).max().map_or(0, |m| m + 1);
        (0..top).map(|n| self.preds.iter().filter(|p| p.stratum == n).cloned().collect()).collect()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }
}

fn cube(preds: &[Predicate], v: &[bool]) -> Formula {
    Formula::and(
        preds
            .iter()
            .zip(v)
            .map(|(p, b)| {
                let f = p.formula().expect("symbolic abstraction needs symbolic predicates").clone();
                if *b {
                    f
                } else {
                    f.negate()
                }
            })
            .collect(),
    )
}

fn valuation(sys: &System, preds: &[Predicate], s: &State) -> Valuation {
    preds.iter().map(|p| p.holds(sys.vars(), s)).collect()
}

/// All valuations `v` of `preds` (optionally primed) for which `base ∧ cube(v)` is satisfiable,
/// each with a model, found by splitting one predicate at a time.
fn feasible_valuations(
    y: &SymbolicTS,
    base: &Formula,
    preds: &[Predicate],
    primed: bool,
) -> Vec<(Valuation, crate::lra::Assignment)> {
    let lits: Vec<Formula> = preds
        .iter()
        .map(|p| {
            let f = p.formula().expect("symbolic abstraction needs symbolic predicates").clone();
            if primed {
                y.prime(&f)
            } else {
                f
            }
        })
        .collect();
    let mut out = Vec::new();
    fn go(
        lits: &[Formula],
        cur: Formula,
        v: &mut Valuation,
        out: &mut Vec<(Valuation, crate::lra::Assignment)>,
    ) {
        match qf_sat(&cur) {
            Sat::Unsat => {}
            Sat::Sat(m) => {
                if v.len() == lits.len() {
                    out.push((v.clone(), m));
                    return;
                }
                let l = &lits[v.len()];
                for b in [true, false] {
                    v.push(b);
                    let next = Formula::and(vec![cur.clone(), if b { l.clone() } else { l.negate() }]);
                    go(lits, next, v, out);
                    v.pop();
                }
            }
        }
    }
    go(&lits, base.clone(), &mut Vec::new(), &mut out);
    out
}

fn primed_state(y: &SymbolicTS, m: &crate::lra::Assignment) -> State {
    y.vars
        .iter()
        .map(|v| m.get(&crate::ts::primed(v)).cloned().unwrap_or_else(|| crate::lra::q(0)))
        .collect()
}

/// Abstract-system queries for a fixed predicate set.
struct Abstraction<'a> {
    sys: &'a System,
    preds: &'a [Predicate],
    /// Explicit systems: class of each state.
    classes: Option<BTreeMap<Valuation, Vec<State>>>,
}

impl<'a> Abstraction<'a> {
    fn new(sys: &'a System, preds: &'a [Predicate]) -> Self {
        let classes = match sys {
            System::Explicit(e) => {
                let mut m: BTreeMap<Valuation, Vec<State>> = BTreeMap::new();
                for s in e.states() {
                    m.entry(valuation(sys, preds, s)).or_default().push(s.clone());
                }
                Some(m)
            }
            System::Symbolic(_) => None,
        };
        Abstraction { sys, preds, classes }
    }

    fn members(&self, v: &Valuation) -> &[State] {
        self.classes.as_ref().unwrap().get(v).map_or(&[], |x| x.as_slice())
    }

    fn is_init(&self, v: &Valuation) -> bool {
        match self.sys {
            System::Explicit(e) => self.members(v).iter().any(|s| e.init().contains(s)),
            System::Symbolic(y) => qf_sat(&Formula::and(vec![y.init.clone(), cube(self.preds, v)])).is_sat(),
        }
    }

    fn is_bad(&self, v: &Valuation) -> bool {
        match self.sys {
            System::Explicit(e) => self.members(v).iter().any(|s| e.bad().contains(s)),
            System::Symbolic(y) => qf_sat(&Formula::and(vec![y.bad.clone(), cube(self.preds, v)])).is_sat(),
        }
    }

    fn has_step(&self, a: &Valuation, b: &Valuation) -> bool {
        match self.sys {
            System::Explicit(e) => {
                let tb: BTreeSet<&State> = self.members(b).iter().collect();
                self.members(a).iter().any(|s| e.successors(s).iter().any(|t| tb.contains(t)))
            }
            System::Symbolic(y) => {
                let f = Formula::and(vec![cube(self.preds, a), y.trans.clone(), y.prime(&cube(self.preds, b))]);
                qf_sat(&f).is_sat()
            }
        }
    }

    /// Initial abstract states with a representative (an initial state).
    fn initial(&self) -> Vec<(Valuation, State)> {
        match self.sys {
            System::Explicit(e) => {
                let mut seen = BTreeSet::new();
                e.init_ordered()
                    .into_iter()
                    .filter_map(|s| {
                        let v = valuation(self.sys, self.preds, &s);
                        seen.insert(v.clone()).then_some((v, s))
                    })
                    .collect()
            }
            System::Symbolic(y) => feasible_valuations(y, &y.init, self.preds, false)
                .into_iter()
                .map(|(v, m)| (v, y.state_from_model(&m, None)))
                .collect(),
        }
    }

    /// Abstract successors of `v`, each with a representative.
    fn successors(&self, v: &Valuation) -> Vec<(Valuation, State)> {
        match self.sys {
            System::Explicit(e) => {
                let mut out: BTreeMap<Valuation, State> = BTreeMap::new();
                for s in self.members(v) {
                    for t in e.successors(s) {
                        out.entry(valuation(self.sys, self.preds, t)).or_insert_with(|| t.clone());
                    }
                }
                out.into_iter().collect()
            }
            System::Symbolic(y) => {
                let base = Formula::and(vec![cube(self.preds, v), y.trans.clone()]);
                feasible_valuations(y, &base, self.preds, true)
                    .into_iter()
                    .map(|(w, m)| (w, primed_state(y, &m)))
                    .collect()
            }
        }
    }
}

/// `−1` iff the classes of `tau` under `preds` form an abstract error path.
pub fn l_cegar(sys: &System, tau: &[State], preds: &[Predicate]) -> Outcome {
    if tau.is_empty() {
        return Outcome::POS;
    }
    let abs = Abstraction::new(sys, preds);
    let vals: Vec<Valuation> = tau.iter().map(|s| valuation(sys, preds, s)).collect();
    let error = abs.is_init(&vals[0])
        && vals.windows(2).all(|w| abs.has_step(&w[0], &w[1]))
        && abs.is_bad(vals.last().unwrap());
    Outcome::from_bool(!error)
}

/// Shortest abstract error path by BFS over valuations.
pub fn abstract_error_search(sys: &System, preds: &[Predicate]) -> AbstractResult {
    let abs = Abstraction::new(sys, preds);
    let mut parent: BTreeMap<Valuation, Option<Valuation>> = BTreeMap::new();
    let mut rep: BTreeMap<Valuation, State> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for (v, s) in abs.initial() {
        if !parent.contains_key(&v) {
            parent.insert(v.clone(), None);
            rep.insert(v.clone(), s);
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        if abs.is_bad(&v) {
            let mut vals = vec![v.clone()];
            let mut cur = v;
            while let Some(Some(p)) = parent.get(&cur) {
                vals.push(p.clone());
                cur = p.clone();
            }
            vals.reverse();
            let reps = vals.iter().map(|w| rep[w].clone()).collect();
            return AbstractResult::Trace(AbstractTrace { reps, vals });
        }
        for (w, s) in abs.successors(&v) {
            if !parent.contains_key(&w) {
                parent.insert(w.clone(), Some(v.clone()));
                rep.insert(w.clone(), s);
                queue.push_back(w);
            }
        }
    }
    AbstractResult::AbstractSafe
}

/// Feasibility of an abstract trace.
///
/// Symbolic systems: the class path is unrolled exactly; if that is
/// infeasible, plain unrollings of length `0..=depth` are tried as well,
/// so a real error within the bound is never reported as spurious.
pub fn concretize(sys: &System, preds: &[Predicate], tau: &AbstractTrace, depth: usize) -> Concretized {
    match sys {
        System::Explicit(e) => concretize_explicit(e, sys, preds, tau),
        System::Symbolic(y) => {
            let n = tau.vals.len() - 1;
            let mut parts = vec![y.at_step(&y.init, 0), y.at_step(&y.bad, n)];
            for (i, v) in tau.vals.iter().enumerate() {
                parts.push(y.at_step(&cube(preds, v), i));
                if i < n {
                    parts.push(y.trans_at(i));
                }
            }
            if let Sat::Sat(m) = qf_sat(&Formula::and(parts)) {
                return Concretized::Feasible((0..=n).map(|i| y.state_from_model(&m, Some(i))).collect());
            }
            match bounded_error(y, depth) {
                Some(t) => Concretized::Feasible(t),
                None => Concretized::Spurious,
            }
        }
    }
}

/// Shortest error trace of length at most `depth` transitions, by unrolling.
pub fn bounded_error(y: &SymbolicTS, depth: usize) -> Option<Vec<State>> {
    for k in 0..=depth {
        let mut parts = vec![y.at_step(&y.init, 0), y.at_step(&y.bad, k)];
        parts.extend((0..k).map(|i| y.trans_at(i)));
        if let Sat::Sat(m) = qf_sat(&Formula::and(parts)) {
            return Some((0..=k).map(|i| y.state_from_model(&m, Some(i))).collect());
        }
    }
    None
}

fn concretize_explicit(e: &ExplicitTS, sys: &System, preds: &[Predicate], tau: &AbstractTrace) -> Concretized {
    // Layered search: step i must stay inside class i.
    let n = tau.vals.len() - 1;
    let in_class = |s: &State, i: usize| valuation(sys, preds, s) == tau.vals[i];
    let mut layer: BTreeMap<State, Option<State>> =
        e.init_ordered().into_iter().filter(|s| in_class(s, 0)).map(|s| (s, None)).collect();
    let mut parents = vec![layer.clone()];
    for i in 1..=n {
        let mut next = BTreeMap::new();
        for s in layer.keys() {
            for t in e.successors(s) {
                if in_class(t, i) && !next.contains_key(t) {
                    next.insert(t.clone(), Some(s.clone()));
                }
            }
        }
        parents.push(next.clone());
        layer = next;
    }
    if let Some(end) = layer.keys().find(|s| e.bad().contains(*s)) {
        let mut path = vec![end.clone()];
        let mut cur = end.clone();
        for i in (1..=n).rev() {
            let p = parents[i][&cur].clone().unwrap();
            path.push(p.clone());
            cur = p;
        }
        path.reverse();
        return Concretized::Feasible(path);
    }
    match explicit_error_search(e) {
        Reach::Trace(t) => Concretized::Feasible(t),
        Reach::Safe => Concretized::Spurious,
    }
}

/// Subsets of `0..n` in (stratum, size, lexicographic) order, up to `max_size`.
fn ordered_subsets(pool: &[Predicate], max_size: usize, max_stratum: Option<usize>) -> Vec<Vec<usize>> {
    let n = pool.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    for k in 1..=max_size.min(n) {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    let st = |s: &Vec<usize>| s.iter().map(|&i| pool[i].stratum).max().unwrap_or(0);
    out.retain(|s| max_stratum.is_none_or(|m| st(s) <= m));
    out.sort_by(|a, b| (st(a), a.len(), a).cmp(&(st(b), b.len(), b)));
    out
}

/// Smallest pool subset `γ` with `l_cegar(tau, γ) = 1`, as pool indices.
pub fn refine(
    sys: &System,
    tau: &[State],
    pool: &[Predicate],
    max_size: usize,
    max_stratum: Option<usize>,
) -> Option<Vec<usize>> {
    ordered_subsets(pool, max_size, max_stratum).into_iter().find(|s| {
        let g: Vec<Predicate> = s.iter().map(|&i| pool[i].clone()).collect();
        l_cegar(sys, tau, &g).is_positive()
    })
}

#[derive(Clone, Debug)]
pub struct CegarConfig {
    pub max_iterations: usize,
    pub unroll_depth: usize,
    pub max_refine_size: usize,
    pub max_refine_stratum: Option<usize>,
    pub seed: u64,
}

impl Default for CegarConfig {
    fn default() -> Self {
        CegarConfig { max_iterations: 50, unroll_depth: 8, max_refine_size: 2, max_refine_stratum: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CegarVerdict {
    Safe(Vec<Predicate>),
    Unsafe(Vec<State>),
    Unknown(Vec<State>),
    Budget,
}

/// A solver verdict together with its JSON iteration trace.
#[derive(Clone, Debug)]
pub struct Report<V> {
    pub verdict: V,
    pub trace: Value,
    pub iterations: usize,
}

/// The engine instance: `X = S*`, `Y = finite subsets of the pool` (as index sets).
pub struct CegarLagrangian<'a> {
    pub sys: &'a System,
    pub pool: &'a [Predicate],
    pub cfg: &'a CegarConfig,
}

impl CegarLagrangian<'_> {
    fn preds(&self, y: &BTreeSet<usize>) -> Vec<Predicate> {
        y.iter().map(|&i| self.pool[i].clone()).collect()
    }
}

impl Lagrangian for CegarLagrangian<'_> {
    type X = Vec<State>;
    type Y = BTreeSet<usize>;

    fn evaluate(&self, x: &Vec<State>, y: &BTreeSet<usize>) -> Outcome {
        l_cegar(self.sys, x, &self.preds(y))
    }

    fn range(&self) -> Vec<i32> {
        vec![-1, 1]
    }

    fn initial_x(&self) -> Vec<State> {
        Vec::new()
    }

    fn initial_y(&self) -> BTreeSet<usize> {
        BTreeSet::new()
    }

    fn dual_check(&self, beta: &BTreeSet<usize>, _ctx: &mut CheckCtx<'_>) -> Check<Vec<State>> {
        let preds = self.preds(beta);
        match abstract_error_search(self.sys, &preds) {
            AbstractResult::AbstractSafe => Check::Pass,
            AbstractResult::Trace(t) => match concretize(self.sys, &preds, &t, self.cfg.unroll_depth) {
                Concretized::Feasible(c) => Check::Counter(c),
                Concretized::Spurious => Check::Counter(t.reps),
            },
        }
    }

    fn primal_check(&self, alpha: &Vec<State>, _ctx: &mut CheckCtx<'_>) -> Check<BTreeSet<usize>> {
        if self.sys.is_error_trace(alpha) {
            return Check::Pass;
        }
        match refine(self.sys, alpha, self.pool, self.cfg.max_refine_size, self.cfg.max_refine_stratum) {
            Some(g) => Check::Counter(g.into_iter().collect()),
            None => Check::Stuck("no pool subset refutes the trace".into()),
        }
    }

    fn join_y(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Option<BTreeSet<usize>> {
        Some(a.union(b).cloned().collect())
    }

    fn has_join_y(&self) -> bool {
        true
    }

    fn stratum_y(&self, y: &BTreeSet<usize>) -> Option<usize> {
        Some(y.iter().map(|&i| self.pool[i].stratum).max().unwrap_or(0))
    }

    fn render_x(&self, x: &Vec<State>) -> Value {
        json!(x.iter().map(fmt_state).collect::<Vec<_>>())
    }

    fn render_y(&self, y: &BTreeSet<usize>) -> Value {
        json!(y.iter().map(|&i| self.pool[i].name.clone()).collect::<Vec<_>>())
    }
}

/// CEGAR: abstract reachability, concretization, refinement from the pool.
pub fn run_cegar(sys: &System, pool: &[Predicate], cfg: &CegarConfig) -> Report<CegarVerdict> {
    let l = CegarLagrangian { sys, pool, cfg };
    if cfg.max_iterations == 0 {
        return Report { verdict: CegarVerdict::Budget, trace: json!([]), iterations: 0 };
    }
    let ecfg = EngineConfig {
        accumulate_y: true,
        max_iterations: cfg.max_iterations,
        smallest_stratum: true,
        random_seed: cfg.seed,
        ..Default::default()
    };
    match run_primal_dual(&l, &ecfg) {
        Ok(run) => {
            let verdict = match run.verdict {
                Verdict::DualWitness(b) => CegarVerdict::Safe(l.preds(&b)),
                Verdict::PrimalWitness(a) => CegarVerdict::Unsafe(a),
                Verdict::Budget => CegarVerdict::Budget,
            };
            Report { verdict, trace: trace_to_json(&l, &run.trace), iterations: run.trace.len() }
        }
        Err(EngineError::Oracle { trace, .. }) => {
            let tau = trace.records.last().and_then(|r| r.alpha.clone()).unwrap_or_default();
            Report { verdict: CegarVerdict::Unknown(tau), trace: trace_to_json(&l, &trace), iterations: trace.len() }
        }
        Err(EngineError::Config(m)) => unreachable!("engine configuration is fixed here: {m}"),
    }
}

pub fn describe(v: &CegarVerdict) -> String {
    match v {
        CegarVerdict::Safe(a) => format!("safe with predicates {:?}", a.iter().map(|p| &p.name).collect::<Vec<_>>()),
        CegarVerdict::Unsafe(t) => format!("unsafe: {}", fmt_trace(t)),
        CegarVerdict::Unknown(t) => format!("unknown: no refinement for {}", fmt_trace(t)),
        CegarVerdict::Budget => "budget exhausted".into(),
    }
}

/// The idealized instance on an explicit system with class structures cached per `y`.
///
/// `ys` lists the predicate sets to range over; `X` is all sequences of length `1..=max_len`,
/// given as indices into `ts.states()`.
pub struct IdealCegar {
    ts: ExplicitTS,
    ys: Vec<Vec<BTreeSet<State>>>,
    max_len: usize,
    info: Vec<ClassInfo>,
}

struct ClassInfo {
    class_of: Vec<usize>,
    init: Vec<bool>,
    bad: Vec<bool>,
    step: Vec<Vec<bool>>,
}

impl IdealCegar {
    pub fn new(ts: ExplicitTS, ys: Vec<Vec<BTreeSet<State>>>, max_len: usize) -> Self {
        let info = ys
            .iter()
            .map(|preds| {
                let mut ids: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
                let mut class_of = Vec::new();
                for s in ts.states() {
                    let v: Vec<bool> = preds.iter().map(|p| p.contains(s)).collect();
                    let n = ids.len();
                    class_of.push(*ids.entry(v).or_insert(n));
                }
                let index: BTreeMap<&State, usize> = ts.states().iter().enumerate().map(|(i, s)| (s, i)).collect();
                let class = |s: &State| class_of[index[s]];
                let k = ids.len();
                let mut init = vec![false; k];
                let mut bad = vec![false; k];
                let mut step = vec![vec![false; k]; k];
                for s in ts.init() {
                    init[class(s)] = true;
                }
                for s in ts.bad() {
                    bad[class(s)] = true;
                }
                for (a, b) in ts.trans() {
                    step[class(a)][class(b)] = true;
                }
                ClassInfo { class_of, init, bad, step }
            })
            .collect();
        IdealCegar { ts, ys, max_len, info }
    }

    pub fn y_count(&self) -> usize {
        self.ys.len()
    }
}

impl Lagrangian for IdealCegar {
    type X = Vec<usize>;
    type Y = usize;

    fn evaluate(&self, x: &Vec<usize>, y: &usize) -> Outcome {
        let ci = &self.info[*y];
        let (Some(first), Some(last)) = (x.first(), x.last()) else { return Outcome::POS };
        let error = ci.init[ci.class_of[*first]]
            && ci.bad[ci.class_of[*last]]
            && x.windows(2).all(|w| ci.step[ci.class_of[w[0]]][ci.class_of[w[1]]]);
        Outcome::from_bool(!error)
    }

    fn range(&self) -> Vec<i32> {
        vec![-1, 1]
    }

    fn initial_x(&self) -> Vec<usize> {
        Vec::new()
    }

    fn initial_y(&self) -> usize {
        0
    }

    fn dual_check(&self, _b: &usize, _c: &mut CheckCtx<'_>) -> Check<Vec<usize>> {
        Check::Stuck("oracle-only instance".into())
    }

    fn primal_check(&self, _a: &Vec<usize>, _c: &mut CheckCtx<'_>) -> Check<usize> {
        Check::Stuck("oracle-only instance".into())
    }

    fn enumerate_x(&self) -> Option<Vec<Vec<usize>>> {
        let n = self.ts.states().len();
        let mut all = Vec::new();
        let mut layer: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..self.max_len {
            layer = layer.iter().flat_map(|p| (0..n).map(move |s| [p.clone(), vec![s]].concat())).collect();
            all.extend(layer.iter().cloned());
        }
        Some(all)
    }

    fn enumerate_y(&self) -> Option<Vec<usize>> {
        Some((0..self.ys.len()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lra::parse_formula;
    use crate::ts::{parse_system, state};

    fn t0(bad: i64) -> System {
        parse_system(&format!("(system :vars (x) :init (= x 0) :trans (= x' (+ x 1)) :bad (= x {bad}))")).unwrap()
    }

    fn p(src: &str, stratum: usize) -> Predicate {
        Predicate::symbolic(parse_formula(src).unwrap(), stratum)
    }

    fn interval_pool() -> Vec<Predicate> {
        let mut v = Vec::new();
        for c in 0..=4i64 {
            for k in [c, -c] {
                v.push(p(&format!("(>= x {k})"), c as usize));
                v.push(p(&format!("(<= x {k})"), c as usize));
            }
        }
        PredicatePool::new(v).preds
    }

    #[test]
    fn l_cegar_examples() {
        let t = t0(-3);
        assert_eq!(l_cegar(&t, &[state(&[0])], &[]), Outcome::NEG);
        assert_eq!(l_cegar(&t, &[state(&[0])], &[p("(>= x 0)", 0)]), Outcome::POS);
        let safe = parse_system("(system :vars (x) :init (= x 0) :trans (= x' x) :bad false)").unwrap();
        assert_eq!(l_cegar(&safe, &[state(&[0])], &[]), Outcome::POS);
    }

    #[test]
    fn abstract_search_examples() {
        let t = t0(-3);
        match abstract_error_search(&t, &[]) {
            AbstractResult::Trace(a) => assert_eq!(a.reps.len(), 1),
            r => panic!("{r:?}"),
        }
        assert_eq!(abstract_error_search(&t, &[p("(>= x 0)", 0)]), AbstractResult::AbstractSafe);
    }

    #[test]
    fn abstract_traces_have_negative_outcome() {
        let t = t0(-3);
        let preds = [p("(>= x 2)", 0), p("(<= x -1)", 0)];
        if let AbstractResult::Trace(a) = abstract_error_search(&t, &preds) {
            assert_eq!(l_cegar(&t, &a.reps, &preds), Outcome::NEG);
        }
    }

    #[test]
    fn concretize_examples() {
        let t = t0(-3);
        let AbstractResult::Trace(a) = abstract_error_search(&t, &[]) else { panic!() };
        assert_eq!(concretize(&t, &[], &a, 6), Concretized::Spurious);
        let u = t0(3);
        let AbstractResult::Trace(a) = abstract_error_search(&u, &[]) else { panic!() };
        match concretize(&u, &[], &a, 6) {
            Concretized::Feasible(tr) => assert!(u.is_error_trace(&tr)),
            Concretized::Spurious => panic!(),
        }
        let z = parse_system("(system :vars (x) :init (= x 0) :trans false :bad (<= x 0))").unwrap();
        let AbstractResult::Trace(a) = abstract_error_search(&z, &[]) else { panic!() };
        assert_eq!(concretize(&z, &[], &a, 0), Concretized::Feasible(vec![state(&[0])]));
    }

    #[test]
    fn refine_prefers_low_strata() {
        let t = t0(-3);
        let pool = vec![p("(>= x -1)", 1), p("(>= x 0)", 0)];
        assert_eq!(refine(&t, &[state(&[0])], &pool, 2, None), Some(vec![1]));
        // A genuine error trace is never refuted.
        let u = t0(1);
        assert_eq!(refine(&u, &[state(&[0]), state(&[1])], &interval_pool(), 2, None), None);
    }

    #[test]
    fn refine_reaches_higher_stratum_only_when_needed() {
        let t = t0(-3);
        let pool = vec![p("(<= x 5)", 0), p("(>= x -2)", 2), p("(>= x -1)", 1)];
        // (<= x 5) does not separate 0 from −3; the stratum-1 predicate does.
        assert_eq!(refine(&t, &[state(&[0])], &pool, 2, None), Some(vec![2]));
    }

    #[test]
    fn t0_is_safe() {
        let t = t0(-3);
        let pool = interval_pool();
        let r = run_cegar(&t, &pool, &CegarConfig::default());
        match &r.verdict {
            CegarVerdict::Safe(a) => assert_eq!(abstract_error_search(&t, a), AbstractResult::AbstractSafe),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn t0_with_bad_three_is_unsafe() {
        let t = t0(3);
        let r = run_cegar(&t, &interval_pool(), &CegarConfig::default());
        assert_eq!(r.verdict, CegarVerdict::Unsafe((0..=3).map(|v| state(&[v])).collect()));
    }

    #[test]
    fn empty_pool_never_decides() {
        let r = run_cegar(&t0(-3), &[], &CegarConfig::default());
        assert!(matches!(r.verdict, CegarVerdict::Unknown(_) | CegarVerdict::Budget));
    }

    #[test]
    fn explicit_two_state_error() {
        let s = parse_system("(system :states (0 1) :init (0) :trans ((0 1)) :bad (1))").unwrap();
        assert!(matches!(abstract_error_search(&s, &[p("(<= x 0)", 0)]), AbstractResult::Trace(_)));
        let r = run_cegar(&s, &[], &CegarConfig::default());
        assert_eq!(r.verdict, CegarVerdict::Unsafe(vec![state(&[0]), state(&[1])]));
    }
}
