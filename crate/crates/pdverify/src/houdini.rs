//! Conjunctive invariants: Houdini, Cartesian CEGAR and primal-dual Houdini over
//! induction-dual pairs.
//!
//! A pair is a system `T`, a base universe of predicates over `T`'s states,
//! and a system `TI` whose states are all subsets of the base universe
//! (bit masks). A state `s` satisfies a mask when it satisfies every member.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cegar::Report;
use crate::lagrangian::{
    run_primal_dual, trace_to_json, Check, CheckCtx, EngineConfig, EngineError, Lagrangian, Outcome, Verdict,
};
use crate::sexp::{self, ParseError, Sexp};
use crate::ts::{explicit_error_search, fmt_state, Reach, keyword_map, restrict, state_of, system_of, ExplicitTS, State, StateLike, System};

/// A set of base predicates, one bit each.
pub type Mask = u32;

pub const MAX_BASE: usize = 12;

pub fn mask_members(m: Mask) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| m >> i & 1 == 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoudiniResult<S, C> {
    /// The greatest inductive subset of the candidates.
    pub invariant: BTreeSet<C>,
    pub safe: bool,
    /// States whose restriction already forces the same outcome.
    pub counter_states: BTreeSet<S>,
}

/// Iterated removal of candidates violated by initial states or by transitions
/// out of states that satisfy the current conjunction.
pub fn houdini<S: StateLike, C: Ord + Clone>(
    ts: &ExplicitTS<S>,
    candidates: &BTreeSet<C>,
    sat: impl Fn(&S, &C) -> bool,
) -> HoudiniResult<S, C> {
    let mut inv = candidates.clone();
    let mut witnesses = BTreeSet::new();
    for s in ts.init_ordered() {
        let before = inv.len();
        inv.retain(|c| sat(&s, c));
        if inv.len() < before {
            witnesses.insert(s);
        }
    }
    loop {
        let mut changed = false;
        for (a, b) in ts.trans() {
            if inv.iter().all(|c| sat(a, c)) {
                let before = inv.len();
                inv.retain(|c| sat(b, c));
                if inv.len() < before {
                    witnesses.insert(a.clone());
                    witnesses.insert(b.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let bad = ts.states().iter().find(|s| ts.bad().contains(*s) && inv.iter().all(|c| sat(s, c)));
    if let Some(b) = bad {
        witnesses.insert(b.clone());
        // A concrete error path refutes every candidate set, so it is the strongest counter.
        if let Reach::Trace(t) = explicit_error_search(ts) {
            witnesses.extend(t);
        }
    }
    HoudiniResult { invariant: inv, safe: bad.is_none(), counter_states: witnesses }
}

/// Houdini over explicit state-set predicates; the invariant is returned as indices into `preds`.
pub fn houdini_fixpoint(ts: &ExplicitTS, preds: &[BTreeSet<State>]) -> HoudiniResult<State, usize> {
    houdini(ts, &(0..preds.len()).collect(), |s, &i| preds[i].contains(s))
}

/// Is the conjunction of `c` an inductive invariant (safe, if `safe` is set)?
pub fn conj_inductive<S: StateLike, C>(ts: &ExplicitTS<S>, c: &[C], sat: impl Fn(&S, &C) -> bool, safe: bool) -> bool {
    let holds = |s: &S| c.iter().all(|p| sat(s, p));
    ts.init().iter().all(holds)
        && ts.trans().iter().all(|(a, b)| !holds(a) || holds(b))
        && (!safe || ts.bad().iter().all(|s| !holds(s)))
}

/// `−1` iff no subset of `y` is a safe inductive invariant of `T` restricted to `x`.
pub fn l_ccegar(ts: &ExplicitTS, x: &BTreeSet<State>, y: &[BTreeSet<State>]) -> Outcome {
    Outcome::from_bool(houdini_fixpoint(&restrict(ts, x), y).safe)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DualityCondition {
    ID1,
    ID2,
    ID3,
    ID4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairCheck {
    Ok,
    Violation(DualityCondition, String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HoudiniError {
    #[error("both sides refuted at x = {x}, y = {y}; the pair is not induction-dual")]
    IllFormed { x: String, y: String },
    #[error("invalid pair: {0:?} ({1})")]
    InvalidPair(DualityCondition, String),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

/// An induction-dual pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualPair {
    pub t: ExplicitTS,
    pub base: Vec<String>,
    /// For each state of `t`, the base predicates it satisfies.
    pub models: BTreeMap<State, Mask>,
    /// States: every mask below `1 << base.len()`.
    pub ti: ExplicitTS<Mask>,
}

impl DualPair {
    pub fn new(
        t: ExplicitTS,
        base: Vec<String>,
        models: BTreeMap<State, Mask>,
        ti_init: impl IntoIterator<Item = Mask>,
        ti_trans: impl IntoIterator<Item = (Mask, Mask)>,
        ti_bad: impl IntoIterator<Item = Mask>,
    ) -> Result<Self, String> {
        if base.len() > MAX_BASE {
            return Err(format!("at most {MAX_BASE} base predicates"));
        }
        let all = (0..1u32 << base.len()).collect::<Vec<_>>();
        let ti = ExplicitTS::new(vec![], all, ti_init, ti_trans, ti_bad).map_err(|e| e.to_string())?;
        let models = t.states().iter().map(|s| (s.clone(), models.get(s).copied().unwrap_or(0))).collect();
        Ok(DualPair { t, base, models, ti })
    }

    pub fn full_mask(&self) -> Mask {
        (1u32 << self.base.len()) - 1
    }

    pub fn sat(&self, s: &State, q: Mask) -> bool {
        self.models.get(s).is_some_and(|m| m & q == q)
    }

    pub fn fmt_mask(&self, q: Mask) -> String {
        let names: Vec<&str> = mask_members(q).map(|i| self.base[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// The swapped pair, with `T`'s states and `TI`'s states exchanging roles.
    pub fn swapped(&self) -> SwappedPair<'_> {
        SwappedPair(self)
    }

    /// `TI` restricted to the subsets of `y`.
    pub fn ti_restrict(&self, y: Mask) -> ExplicitTS<Mask> {
        let keep: BTreeSet<Mask> = self.ti.states().iter().copied().filter(|q| q & !y == 0).collect();
        restrict(&self.ti, &keep)
    }

    /// Houdini on `T↾x` with the base predicates in `y`.
    pub fn houdini_t(&self, x: &BTreeSet<State>, y: Mask) -> HoudiniResult<State, usize> {
        houdini(&restrict(&self.t, x), &mask_members(y).collect(), |s, &i| self.sat(s, 1 << i))
    }

    /// Houdini on `TI↾P(y)` with the states in `x` as predicates.
    pub fn houdini_ti(&self, x: &BTreeSet<State>, y: Mask) -> HoudiniResult<Mask, State> {
        houdini(&self.ti_restrict(y), x, |q, s| self.sat(s, *q))
    }
}

/// Read-only view of a pair with the sides exchanged, for the symmetry property.
pub struct SwappedPair<'a>(&'a DualPair);

impl SwappedPair<'_> {
    /// The three-valued outcome with `x` a set of `TI` states and `y` a set of `T` states.
    pub fn l_pdh(&self, x: &BTreeSet<Mask>, y: &BTreeSet<State>) -> Result<Outcome, HoudiniError> {
        let p = self.0;
        let tx = restrict(&p.ti, x);
        let ty = restrict(&p.t, y);
        // Predicates of the swapped `T` (here: TI) are sets of its dual's states (here: T-states).
        let neg = !houdini(&tx, y, |q, s| p.sat(s, *q)).safe;
        let pos = !houdini(&ty, x, |s, q| p.sat(s, *q)).safe;
        three_valued(neg, pos, || format!("{x:?}"), || format!("{y:?}"))
    }
}

fn three_valued(
    neg: bool,
    pos: bool,
    x: impl Fn() -> String,
    y: impl Fn() -> String,
) -> Result<Outcome, HoudiniError> {
    match (neg, pos) {
        (true, true) => Err(HoudiniError::IllFormed { x: x(), y: y() }),
        (true, false) => Ok(Outcome::NEG),
        (false, true) => Ok(Outcome::POS),
        (false, false) => Ok(Outcome::ZERO),
    }
}

/// Exhaustive check of the four duality conditions.
pub fn validate_pair(p: &DualPair) -> PairCheck {
    let tis = p.ti.states();
    for s in p.t.init() {
        if let Some(&q) = tis.iter().find(|&&q| !p.sat(s, q)) {
            return PairCheck::Violation(DualityCondition::ID1, format!("{} ⊭ {}", fmt_state(s), p.fmt_mask(q)));
        }
    }
    for &q in p.ti.init() {
        if let Some(s) = p.t.states().iter().find(|s| !p.sat(s, q)) {
            return PairCheck::Violation(DualityCondition::ID2, format!("{} ⊭ {}", fmt_state(s), p.fmt_mask(q)));
        }
    }
    for s in p.t.bad() {
        if let Some(&q) = p.ti.bad().iter().find(|&&q| p.sat(s, q)) {
            return PairCheck::Violation(DualityCondition::ID3, format!("{} ⊨ {}", fmt_state(s), p.fmt_mask(q)));
        }
    }
    for (s, s2) in p.t.trans() {
        for &(q, q2) in p.ti.trans() {
            if p.sat(s, q) && p.sat(s, q2) && p.sat(s2, q) && !p.sat(s2, q2) {
                return PairCheck::Violation(
                    DualityCondition::ID4,
                    format!(
                        "{} -> {} with {} -> {}",
                        fmt_state(s),
                        fmt_state(s2),
                        p.fmt_mask(q),
                        p.fmt_mask(q2)
                    ),
                );
            }
        }
    }
    PairCheck::Ok
}

/// The three-valued Lagrangian: `−1` if no subset of `y` is a safe inductive
/// invariant of `T↾x`, `1` if no subset of `x` is one for `TI↾P(y)`, else `0`.
pub fn l_pdh(p: &DualPair, x: &BTreeSet<State>, y: Mask) -> Result<Outcome, HoudiniError> {
    let neg = !p.houdini_t(x, y).safe;
    let pos = !p.houdini_ti(x, y).safe;
    three_valued(neg, pos, || format!("{:?}", x.iter().map(fmt_state).collect::<Vec<_>>()), || p.fmt_mask(y))
}

#[derive(Clone, Debug)]
pub struct HoudiniConfig {
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for HoudiniConfig {
    fn default() -> Self {
        HoudiniConfig { max_iterations: 100, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HoudiniVerdict {
    /// The accumulated predicates and the safe inductive conjunction found among them.
    Safe { predicates: Mask, invariant: Mask },
    Unknown(BTreeSet<State>),
    Budget,
}

pub struct PdhLagrangian<'a> {
    pub pair: &'a DualPair,
    pub start: Mask,
}

impl Lagrangian for PdhLagrangian<'_> {
    type X = BTreeSet<State>;
    type Y = Mask;

    fn evaluate(&self, x: &BTreeSet<State>, y: &Mask) -> Outcome {
        l_pdh(self.pair, x, *y).expect("validated pair")
    }

    fn initial_x(&self) -> BTreeSet<State> {
        BTreeSet::new()
    }

    fn initial_y(&self) -> Mask {
        self.start
    }

    fn dual_check(&self, beta: &Mask, _ctx: &mut CheckCtx<'_>) -> Check<BTreeSet<State>> {
        let all = self.pair.t.states().iter().cloned().collect();
        let h = self.pair.houdini_t(&all, *beta);
        if h.safe {
            Check::Pass
        } else {
            Check::Counter(h.counter_states)
        }
    }

    fn primal_check(&self, alpha: &BTreeSet<State>, _ctx: &mut CheckCtx<'_>) -> Check<Mask> {
        let h = self.pair.houdini_ti(alpha, self.pair.full_mask());
        if h.safe {
            Check::Pass
        } else {
            Check::Counter(h.counter_states.iter().fold(0, |a, q| a | q))
        }
    }

    fn join_x(&self, a: &BTreeSet<State>, b: &BTreeSet<State>) -> Option<BTreeSet<State>> {
        Some(a.union(b).cloned().collect())
    }

    fn join_y(&self, a: &Mask, b: &Mask) -> Option<Mask> {
        Some(a | b)
    }

    fn has_join_x(&self) -> bool {
        true
    }

    fn has_join_y(&self) -> bool {
        true
    }

    fn enumerate_x(&self) -> Option<Vec<BTreeSet<State>>> {
        let st = self.pair.t.states();
        (st.len() <= 12).then(|| {
            (0u32..1 << st.len())
                .map(|m| mask_members(m).map(|i| st[i].clone()).collect())
                .collect()
        })
    }

    fn enumerate_y(&self) -> Option<Vec<Mask>> {
        Some((0..=self.pair.full_mask()).collect())
    }

    fn render_x(&self, x: &BTreeSet<State>) -> Value {
        json!(x.iter().map(fmt_state).collect::<Vec<_>>())
    }

    fn render_y(&self, y: &Mask) -> Value {
        json!(self.pair.fmt_mask(*y))
    }
}

/// Primal-dual Houdini, accumulating good states and good predicates.
pub fn run_pd_houdini(pair: &DualPair, cfg: &HoudiniConfig) -> Result<Report<HoudiniVerdict>, HoudiniError> {
    if let PairCheck::Violation(c, w) = validate_pair(pair) {
        return Err(HoudiniError::InvalidPair(c, w));
    }
    let start = pair.ti.states().iter().copied().find(|q| pair.ti.bad().contains(q));
    let Some(start) = start else {
        return Ok(Report { verdict: HoudiniVerdict::Unknown(BTreeSet::new()), trace: json!([]), iterations: 0 });
    };
    if cfg.max_iterations == 0 {
        return Ok(Report { verdict: HoudiniVerdict::Budget, trace: json!([]), iterations: 0 });
    }
    let l = PdhLagrangian { pair, start };
    let ecfg = EngineConfig {
        accumulate_x: true,
        accumulate_y: true,
        max_iterations: cfg.max_iterations,
        random_seed: cfg.seed,
        ..Default::default()
    };
    match run_primal_dual(&l, &ecfg) {
        Ok(run) => {
            let verdict = match run.verdict {
                Verdict::DualWitness(b) => {
                    let all = pair.t.states().iter().cloned().collect();
                    let inv = pair.houdini_t(&all, b).invariant.iter().fold(0, |a, i| a | 1 << i);
                    HoudiniVerdict::Safe { predicates: b, invariant: inv }
                }
                Verdict::PrimalWitness(a) => HoudiniVerdict::Unknown(a),
                Verdict::Budget => HoudiniVerdict::Budget,
            };
            Ok(Report { verdict, trace: trace_to_json(&l, &run.trace), iterations: run.trace.len() })
        }
        Err(EngineError::Oracle { reason, .. }) => unreachable!("Houdini checks always decide: {reason}"),
        Err(EngineError::Config(m)) => unreachable!("engine configuration is fixed here: {m}"),
    }
}

/// Random valid pair with `n` states and `k` base predicates.
///
/// Initial states, initial/bad masks and `TI` transitions are filtered so the
/// duality conditions hold by construction.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize, k: usize) -> DualPair {
    let states: Vec<State> = (0..n as i64).map(|v| vec![crate::lra::q(v)]).collect();
    let full: Mask = (1 << k) - 1;
    let models: BTreeMap<State, Mask> = states.iter().map(|s| (s.clone(), rng.gen_range(0..=full))).collect();
    let init: Vec<State> =
        states.iter().filter(|s| models[*s] == full && rng.gen_bool(0.6)).cloned().collect();
    let bad: Vec<State> = states.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
    let mut trans = Vec::new();
    for a in &states {
        for b in &states {
            if rng.gen_bool(0.3) {
                trans.push((a.clone(), b.clone()));
            }
        }
    }
    let t = ExplicitTS::new(vec!["x".into()], states.clone(), init, trans, bad).unwrap();
    let sat = |s: &State, q: Mask| models[s] & q == q;
    let masks: Vec<Mask> = (0..=full).collect();
    let ti_init: Vec<Mask> =
        masks.iter().copied().filter(|&q| states.iter().all(|s| sat(s, q)) && rng.gen_bool(0.7)).collect();
    let ti_bad: Vec<Mask> = masks
        .iter()
        .copied()
        .filter(|&q| t.bad().iter().all(|s| !sat(s, q)) && rng.gen_bool(0.5))
        .collect();
    let mut ti_trans = Vec::new();
    let mut pairs: Vec<(Mask, Mask)> = masks.iter().flat_map(|&a| masks.iter().map(move |&b| (a, b))).collect();
    pairs.shuffle(rng);
    for (q, q2) in pairs.into_iter().take(3 * masks.len()) {
        let ok = t.trans().iter().all(|(s, s2)| !(sat(s, q) && sat(s, q2) && sat(s2, q)) || sat(s2, q2));
        if ok {
            ti_trans.push((q, q2));
        }
    }
    let base = (0..k).map(|i| format!("p{i}")).collect();
    DualPair::new(t, base, models, ti_init, ti_trans, ti_bad).unwrap()
}

fn mask_of(e: &Sexp, names: &[String]) -> Result<Mask, ParseError> {
    let mut m = 0;
    for a in e.expect_list("predicate set")? {
        let n = a.expect_atom("predicate name")?;
        let i = names
            .iter()
            .position(|x| x == n)
            .ok_or_else(|| ParseError::new(a.pos(), format!("unknown predicate {n}")))?;
        m |= 1 << i;
    }
    Ok(m)
}

/// `(pair :t (system :states …) :preds ((p s…) …) :ti-init (set…) :ti-trans ((set set)…) :ti-bad (set…))`.
pub fn pair_of(e: &Sexp) -> Result<DualPair, ParseError> {
    if e.head() != Some("pair") {
        return Err(ParseError::new(e.pos(), "expected (pair ...)"));
    }
    let kw = keyword_map(e.as_list().unwrap())?;
    let get = |k: &str| kw.get(k).copied().ok_or_else(|| ParseError::new(e.pos(), format!("missing :{k}")));
    let t = match system_of(get("t")?)? {
        System::Explicit(t) => t,
        System::Symbolic(_) => return Err(ParseError::new(e.pos(), ":t must be an explicit system")),
    };
    let mut names = Vec::new();
    let mut models: BTreeMap<State, Mask> = BTreeMap::new();
    for (i, p) in get("preds")?.expect_list("predicate list")?.iter().enumerate() {
        let v = p.expect_list("predicate")?;
        let name = v.first().ok_or_else(|| ParseError::new(p.pos(), "empty predicate"))?.expect_atom("name")?;
        names.push(name.to_string());
        for s in &v[1..] {
            let s = state_of(s)?;
            if !t.contains(&s) {
                return Err(ParseError::new(p.pos(), format!("{} is not a state of :t", fmt_state(&s))));
            }
            *models.entry(s).or_default() |= 1 << i;
        }
    }
    let sets = |k: &str| -> Result<Vec<Mask>, ParseError> {
        match kw.get(k) {
            Some(l) => l.expect_list("set list")?.iter().map(|x| mask_of(x, &names)).collect(),
            None => Ok(vec![]),
        }
    };
    let mut trans = Vec::new();
    if let Some(l) = kw.get("ti-trans") {
        for pr in l.expect_list("transition list")? {
            let v = pr.expect_list("transition")?;
            if v.len() != 2 {
                return Err(ParseError::new(pr.pos(), "transition must be a pair"));
            }
            trans.push((mask_of(&v[0], &names)?, mask_of(&v[1], &names)?));
        }
    }
    let (init, bad) = (sets("ti-init")?, sets("ti-bad")?);
    DualPair::new(t, names, models, init, trans, bad)
        .map_err(|m| ParseError::new(e.pos(), m))
}

pub fn parse_pair(src: &str) -> Result<DualPair, ParseError> {
    pair_of(&sexp::parse_one(src)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ts::state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[i64]) -> BTreeSet<State> {
        v.iter().map(|&x| state(&[x])).collect()
    }

    fn three() -> ExplicitTS {
        ExplicitTS::new(vec!["x".into()], [0, 1, 2].map(|v| state(&[v])), [state(&[0])], [(state(&[0]), state(&[1]))], [state(&[2])])
            .unwrap()
    }

    #[test]
    fn houdini_three_state_example() {
        let h = houdini_fixpoint(&three(), &[set(&[0, 1]), set(&[0])]);
        assert_eq!(h.invariant, [0].into());
        assert!(h.safe);
        assert!(h.counter_states.is_superset(&set(&[0, 1])));
        let h = houdini_fixpoint(&three(), &[]);
        assert!(h.invariant.is_empty() && !h.safe);
    }

    #[test]
    fn l_ccegar_examples() {
        let t = three();
        let y = [set(&[0, 1]), set(&[0])];
        assert_eq!(l_ccegar(&t, &BTreeSet::new(), &y), Outcome::POS);
        assert_eq!(l_ccegar(&t, &set(&[0, 1, 2]), &y), Outcome::POS);
        let u = ExplicitTS::new(vec!["x".into()], [0, 1].map(|v| state(&[v])), [state(&[0])], [(state(&[0]), state(&[1]))], [state(&[1])])
            .unwrap();
        assert_eq!(l_ccegar(&u, &set(&[0, 1]), &[set(&[0]), set(&[1])]), Outcome::NEG);
    }

    fn small_pair() -> DualPair {
        parse_pair(
            "(pair :t (system :states (0 1 2) :init (0) :trans ((0 1) (1 1)) :bad (2))
                   :preds ((a 0 1) (b 0))
                   :ti-init (()) :ti-trans ((() (a))) :ti-bad ((a)))",
        )
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate_pair(&small_pair()), PairCheck::Ok);
        let bad = parse_pair(
            "(pair :t (system :states (0 1) :init (0 1) :trans () :bad ()) :preds ((a 0)) :ti-init () :ti-bad ())",
        )
        .unwrap();
        assert!(matches!(validate_pair(&bad), PairCheck::Violation(DualityCondition::ID1, _)));
    }

    #[test]
    fn pd_houdini_safe() {
        let p = small_pair();
        let r = run_pd_houdini(&p, &HoudiniConfig::default()).unwrap();
        match r.verdict {
            HoudiniVerdict::Safe { invariant, .. } => {
                let preds: Vec<usize> = mask_members(invariant).collect();
                assert!(conj_inductive(&p.t, &preds, |s, &i| p.sat(s, 1 << i), true));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn pd_houdini_unsafe() {
        let p = parse_pair(
            "(pair :t (system :states (0 1 2) :init (0) :trans ((0 1) (1 2)) :bad (2))
                   :preds ((a 0 1 2)) :ti-init (()) :ti-bad ())",
        )
        .unwrap();
        // No bad mask: nothing to start from.
        assert!(matches!(run_pd_houdini(&p, &HoudiniConfig::default()).unwrap().verdict, HoudiniVerdict::Unknown(_)));
        let p = parse_pair(
            "(pair :t (system :states (0 1 2) :init (0) :trans ((0 1) (1 2)) :bad (2))
                   :preds ((a 0 1)) :ti-init (()) :ti-bad ((a)))",
        );
        // (a) excludes bad state 2 but 0 -> 1 -> 2 is a real error path; ID1 forces init ⊨ a.
        let p = p.unwrap();
        assert_eq!(validate_pair(&p), PairCheck::Ok);
        match run_pd_houdini(&p, &HoudiniConfig::default()).unwrap().verdict {
            HoudiniVerdict::Unknown(s) => assert!(s.is_superset(&set(&[0, 1, 2]))),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn budget_one() {
        let p = parse_pair(
            "(pair :t (system :states (0 1 2 3) :init (0) :trans ((0 1) (1 2) (2 2)) :bad (3))
                   :preds ((b 0) (a 0 1 2)) :ti-init (()) :ti-trans ((() (a))) :ti-bad ((b) (a)))",
        )
        .unwrap();
        assert_eq!(validate_pair(&p), PairCheck::Ok);
        let r = run_pd_houdini(&p, &HoudiniConfig { max_iterations: 1, seed: 0 }).unwrap();
        assert_eq!(r.verdict, HoudiniVerdict::Budget);
        assert_eq!(r.iterations, 1);
        let r = run_pd_houdini(&p, &HoudiniConfig::default()).unwrap();
        assert_eq!(r.verdict, HoudiniVerdict::Safe { predicates: 0b11, invariant: 0b10 });
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn generated_pairs_are_valid_and_well_defined() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_pair(&mut rng, 4, 3);
            assert_eq!(validate_pair(&p), PairCheck::Ok);
            let l = PdhLagrangian { pair: &p, start: 0 };
            for x in l.enumerate_x().unwrap() {
                for y in 0..=p.full_mask() {
                    let v = l_pdh(&p, &x, y).unwrap();
                    let x2: BTreeSet<Mask> = p.ti_restrict(y).states().iter().copied().collect();
                    assert_eq!(p.swapped().l_pdh(&x2, &x).unwrap().value(), -v.value());
                }
            }
        }
    }
}
