//! Termination: ranking functions learned from samples (ICE mode) and
//! disjunctive well-foundedness refined along traces (CEGAR mode).
//!
//! Both work on explicit systems; symbolic systems are truncated to an
//! integer box first, so their verdicts speak about that box only.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::cegar::Report;
use crate::ice::render_sample;
use crate::lagrangian::{
    run_primal_dual, trace_to_json, Check, CheckCtx, EngineConfig, EngineError, Lagrangian, Outcome, Side, Verdict,
};
use crate::lra::{fmt_rational, Rational};
use crate::ts::{fmt_state, fmt_trace, ranking_product, ExplicitTS, ProductWitness, Rank, Reach, Sample, State};

/// `r(s) = max(⌊a·s + b⌋, 0)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankingTemplate {
    pub coeffs: Vec<i64>,
    pub offset: i64,
}

impl RankingTemplate {
    pub fn new(coeffs: Vec<i64>, offset: i64) -> Self {
        RankingTemplate { coeffs, offset }
    }

    pub fn eval(&self, s: &State) -> BigInt {
        let mut v = Rational::from_integer(self.offset.into());
        for (a, x) in self.coeffs.iter().zip(s) {
            v += Rational::from_integer((*a).into()) * x;
        }
        let f = v.floor().to_integer();
        if f.is_negative() {
            BigInt::zero()
        } else {
            f
        }
    }

    pub fn stratum(&self) -> usize {
        self.coeffs.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn render(&self, vars: &[String]) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (a, v) in self.coeffs.iter().zip(vars) {
            match a {
                0 => {}
                1 => parts.push(v.clone()),
                -1 => parts.push(format!("-{v}")),
                a => parts.push(format!("{a}{v}")),
            }
        }
        if self.offset != 0 || parts.is_empty() {
            parts.push(self.offset.to_string());
        }
        format!("max({}, 0)", parts.join(" + ").replace("+ -", "- "))
    }
}

impl Rank<State> for RankingTemplate {
    fn rank(&self, s: &State) -> Rational {
        Rational::from_integer(self.eval(s))
    }
}

/// Every non-constant template with `|a_i| ≤ max_coef` and `|b| ≤ max_offset`,
/// in (stratum, support size, |offset|, coefficients, offset) order.
pub fn template_pool(dim: usize, max_coef: i64, max_offset: i64) -> Vec<RankingTemplate> {
    let mut coefs: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        coefs = coefs.iter().flat_map(|c| (-max_coef..=max_coef).map(move |a| [c.clone(), vec![a]].concat())).collect();
    }
    let mut out: Vec<RankingTemplate> = coefs
        .into_iter()
        .filter(|c| c.iter().any(|a| *a != 0))
        .flat_map(|c| (-max_offset..=max_offset).map(move |b| RankingTemplate::new(c.clone(), b)))
        .collect();
    out.sort_by_key(|t| {
        (t.stratum(), t.coeffs.iter().filter(|a| **a != 0).count(), t.offset.unsigned_abs(), t.coeffs.clone(), t.offset)
    });
    out
}

/// `s ≻_R t` iff some member of `R` strictly decreases.
pub fn dwf_decreases(rs: &[RankingTemplate], s: &State, t: &State) -> bool {
    rs.iter().any(|r| r.eval(s) > r.eval(t))
}

/// States of the sample reachable from its initial states through its own transitions.
fn sample_reachable(s: &Sample) -> BTreeSet<State> {
    let mut seen: BTreeSet<State> = s.init.clone();
    let mut frontier: Vec<State> = seen.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        for (a, b) in &s.trans {
            if *a == x && seen.insert(b.clone()) {
                frontier.push(b.clone());
            }
        }
    }
    seen
}

/// `1` iff `r` decreases on every sampled transition reachable from the sampled initial states.
pub fn l_t_ice(sample: &Sample, r: &RankingTemplate) -> Outcome {
    let reach = sample_reachable(sample);
    Outcome::from_bool(sample.trans.iter().filter(|(a, _)| reach.contains(a)).all(|(a, b)| r.eval(a) > r.eval(b)))
}

/// `1` iff every ordered pair `i < j` of the trace decreases under `≻_R`.
pub fn l_t_cegar(tau: &[State], rs: &[RankingTemplate]) -> Outcome {
    let ok = (0..tau.len()).all(|i| (i + 1..tau.len()).all(|j| dwf_decreases(rs, &tau[i], &tau[j])));
    Outcome::from_bool(ok)
}

#[derive(Clone, Debug)]
pub enum RankWitness<'a> {
    Single(&'a RankingTemplate),
    Dwf(&'a [RankingTemplate]),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankCounter {
    /// Single mode: an initial state and the transitions leading to the violation.
    Sample(Sample),
    /// Disjunctive mode: the underlying trace and the violating pair of positions.
    Trace { trace: Vec<State>, pair: (usize, usize) },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankCheck {
    Pass,
    Counter(RankCounter),
}

/// Safety of the ranking product, with the error trace mapped back to `T`.
pub fn dual_check(ts: &ExplicitTS, w: RankWitness<'_>) -> RankCheck {
    match w {
        RankWitness::Single(r) => match ranking_product(ts, ProductWitness::Single(r)).search() {
            Reach::Safe => RankCheck::Pass,
            Reach::Trace(t) => {
                let mut s = Sample::default();
                s.init.insert(t[0].0.clone());
                s.trans.extend(t);
                RankCheck::Counter(RankCounter::Sample(s))
            }
        },
        RankWitness::Dwf(rs) => match ranking_product(ts, ProductWitness::Dwf(rs)).search() {
            Reach::Safe => RankCheck::Pass,
            Reach::Trace(t) => {
                let mut trace = vec![t[0].0.clone()];
                trace.extend(t.iter().map(|p| p.1.clone()));
                let (past, cur) = t.last().unwrap().clone();
                let n = trace.len() - 1;
                let i = trace[..n].iter().rposition(|s| *s == past).expect("the past state lies on the trace");
                debug_assert_eq!(trace[n], cur);
                RankCheck::Counter(RankCounter::Trace { trace, pair: (i, n) })
            }
        },
    }
}

/// Smallest-stratum template (pool order) ranking the sample.
pub fn synthesize_for_sample(sample: &Sample, pool: &[RankingTemplate]) -> Option<usize> {
    pool.iter().position(|r| l_t_ice(sample, r).is_positive())
}

/// Smallest template set, at most `max_size` members, ordering every pair of the trace.
pub fn synthesize_for_trace(tau: &[State], pool: &[RankingTemplate], max_size: usize) -> Option<Vec<usize>> {
    // A repeated state can never be ordered.
    let distinct: BTreeSet<&State> = tau.iter().collect();
    if distinct.len() < tau.len() {
        return None;
    }
    if let Some(i) = pool.iter().position(|r| l_t_cegar(tau, std::slice::from_ref(r)).is_positive()) {
        return Some(vec![i]);
    }
    if max_size < 2 {
        return None;
    }
    // Pairs: each template covers a set of ordered pairs; two must cover all.
    let pairs: Vec<(usize, usize)> = (0..tau.len()).flat_map(|i| (i + 1..tau.len()).map(move |j| (i, j))).collect();
    let cover: Vec<u128> = pool
        .iter()
        .map(|r| {
            pairs.iter().enumerate().fold(0u128, |m, (k, &(i, j))| {
                if k < 128 && r.eval(&tau[i]) > r.eval(&tau[j]) {
                    m | 1 << k
                } else {
                    m
                }
            })
        })
        .collect();
    if pairs.len() > 128 {
        return None;
    }
    let full: u128 = if pairs.len() == 128 { u128::MAX } else { (1u128 << pairs.len()) - 1 };
    let mut best: Option<(usize, Vec<usize>)> = None;
    for a in 0..pool.len() {
        for b in a + 1..pool.len() {
            if cover[a] | cover[b] == full {
                let st = pool[a].stratum().max(pool[b].stratum());
                if best.as_ref().is_none_or(|(s, _)| st < *s) {
                    best = Some((st, vec![a, b]));
                }
            }
        }
    }
    best.map(|(_, v)| v)
}

/// Synthesis from either kind of counter.
pub fn synthesize_ranking(c: &RankCounter, pool: &[RankingTemplate]) -> Option<Vec<usize>> {
    match c {
        RankCounter::Sample(s) => synthesize_for_sample(s, pool).map(|i| vec![i]),
        RankCounter::Trace { trace, .. } => synthesize_for_trace(trace, pool, 2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermMethod {
    Ice,
    Cegar,
}

#[derive(Clone, Debug)]
pub struct TermConfig {
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for TermConfig {
    fn default() -> Self {
        TermConfig { max_iterations: 100, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermVerdict {
    Terminating(Vec<RankingTemplate>),
    Unknown(RankCounter),
    Budget,
}

pub struct TIceLagrangian<'a> {
    pub ts: &'a ExplicitTS,
    pub pool: &'a [RankingTemplate],
}

impl Lagrangian for TIceLagrangian<'_> {
    type X = Sample;
    type Y = usize;

    fn evaluate(&self, x: &Sample, y: &usize) -> Outcome {
        l_t_ice(x, &self.pool[*y])
    }

    fn range(&self) -> Vec<i32> {
        vec![-1, 1]
    }

    fn initial_x(&self) -> Sample {
        Sample::default()
    }

    fn initial_y(&self) -> usize {
        0
    }

    fn dual_check(&self, beta: &usize, _ctx: &mut CheckCtx<'_>) -> Check<Sample> {
        match dual_check(self.ts, RankWitness::Single(&self.pool[*beta])) {
            RankCheck::Pass => Check::Pass,
            RankCheck::Counter(RankCounter::Sample(s)) => Check::Counter(s),
            RankCheck::Counter(c) => unreachable!("single mode yields samples, got {c:?}"),
        }
    }

    fn primal_check(&self, alpha: &Sample, _ctx: &mut CheckCtx<'_>) -> Check<usize> {
        match synthesize_for_sample(alpha, self.pool) {
            Some(i) => Check::Counter(i),
            None => Check::Pass,
        }
    }

    fn join_x(&self, a: &Sample, b: &Sample) -> Option<Sample> {
        Some(a.join(b))
    }

    fn has_join_x(&self) -> bool {
        true
    }

    fn stratum_y(&self, y: &usize) -> Option<usize> {
        Some(self.pool[*y].stratum())
    }

    fn render_x(&self, x: &Sample) -> Value {
        render_sample(x)
    }

    fn render_y(&self, y: &usize) -> Value {
        json!(self.pool[*y].render(self.ts.vars()))
    }
}

pub struct TCegarLagrangian<'a> {
    pub ts: &'a ExplicitTS,
    pub pool: &'a [RankingTemplate],
}

impl TCegarLagrangian<'_> {
    fn set(&self, y: &BTreeSet<usize>) -> Vec<RankingTemplate> {
        y.iter().map(|&i| self.pool[i].clone()).collect()
    }
}

impl Lagrangian for TCegarLagrangian<'_> {
    type X = Vec<State>;
    type Y = BTreeSet<usize>;

    fn evaluate(&self, x: &Vec<State>, y: &BTreeSet<usize>) -> Outcome {
        l_t_cegar(x, &self.set(y))
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
        match dual_check(self.ts, RankWitness::Dwf(&self.set(beta))) {
            RankCheck::Pass => Check::Pass,
            RankCheck::Counter(RankCounter::Trace { trace, .. }) => Check::Counter(trace),
            RankCheck::Counter(c) => unreachable!("disjunctive mode yields traces, got {c:?}"),
        }
    }

    fn primal_check(&self, alpha: &Vec<State>, _ctx: &mut CheckCtx<'_>) -> Check<BTreeSet<usize>> {
        match synthesize_for_trace(alpha, self.pool, 2) {
            Some(v) => Check::Counter(v.into_iter().collect()),
            None => Check::Stuck("no template set orders every pair of the trace".into()),
        }
    }

    fn join_y(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Option<BTreeSet<usize>> {
        Some(a.union(b).cloned().collect())
    }

    fn has_join_y(&self) -> bool {
        true
    }

    fn stratum_y(&self, y: &BTreeSet<usize>) -> Option<usize> {
        Some(y.iter().map(|&i| self.pool[i].stratum()).max().unwrap_or(0))
    }

    fn render_x(&self, x: &Vec<State>) -> Value {
        json!(x.iter().map(fmt_state).collect::<Vec<_>>())
    }

    fn render_y(&self, y: &BTreeSet<usize>) -> Value {
        json!(y.iter().map(|&i| self.pool[i].render(self.ts.vars())).collect::<Vec<_>>())
    }
}

/// The violating position pair of a trace under `R`, if any (first in lexicographic order).
pub fn first_unordered_pair(tau: &[State], rs: &[RankingTemplate]) -> Option<(usize, usize)> {
    (0..tau.len()).flat_map(|i| (i + 1..tau.len()).map(move |j| (i, j))).find(|&(i, j)| !dwf_decreases(rs, &tau[i], &tau[j]))
}

pub fn run_termination(
    ts: &ExplicitTS,
    pool: &[RankingTemplate],
    method: TermMethod,
    cfg: &TermConfig,
) -> Report<TermVerdict> {
    if cfg.max_iterations == 0 {
        return Report { verdict: TermVerdict::Budget, trace: json!([]), iterations: 0 };
    }
    let mut ecfg = EngineConfig {
        max_iterations: cfg.max_iterations,
        smallest_stratum: true,
        random_seed: cfg.seed,
        ..Default::default()
    };
    match method {
        TermMethod::Ice => {
            if pool.is_empty() {
                let v = TermVerdict::Unknown(RankCounter::Sample(Sample::default()));
                return Report { verdict: v, trace: json!([]), iterations: 0 };
            }
            let l = TIceLagrangian { ts, pool };
            ecfg.accumulate_x = true;
            ecfg.start_side = Side::Primal;
            match run_primal_dual(&l, &ecfg) {
                Ok(run) => {
                    let verdict = match run.verdict {
                        Verdict::DualWitness(b) => TermVerdict::Terminating(vec![pool[b].clone()]),
                        Verdict::PrimalWitness(a) => TermVerdict::Unknown(RankCounter::Sample(a)),
                        Verdict::Budget => TermVerdict::Budget,
                    };
                    Report { verdict, trace: trace_to_json(&l, &run.trace), iterations: run.trace.len() }
                }
                Err(e) => unreachable!("ranking checks always decide: {e:?}"),
            }
        }
        TermMethod::Cegar => {
            let l = TCegarLagrangian { ts, pool };
            ecfg.accumulate_y = true;
            match run_primal_dual(&l, &ecfg) {
                Ok(run) => {
                    let verdict = match run.verdict {
                        Verdict::DualWitness(b) => TermVerdict::Terminating(l.set(&b)),
                        Verdict::PrimalWitness(a) => {
                            // Only reachable if the empty trace is produced, which the product never does.
                            TermVerdict::Unknown(RankCounter::Trace { trace: a, pair: (0, 0) })
                        }
                        Verdict::Budget => TermVerdict::Budget,
                    };
                    Report { verdict, trace: trace_to_json(&l, &run.trace), iterations: run.trace.len() }
                }
                Err(EngineError::Oracle { trace, .. }) => {
                    let rec = trace.records.last();
                    let tau = rec.and_then(|r| r.alpha.clone()).unwrap_or_default();
                    let rs = rec.and_then(|r| r.beta.as_ref()).map(|b| l.set(b)).unwrap_or_default();
                    let pair = first_unordered_pair(&tau, &rs).unwrap_or((0, 0));
                    let v = TermVerdict::Unknown(RankCounter::Trace { trace: tau, pair });
                    Report { verdict: v, trace: trace_to_json(&l, &trace), iterations: trace.len() }
                }
                Err(EngineError::Config(m)) => unreachable!("engine configuration is fixed here: {m}"),
            }
        }
    }
}

pub fn describe(v: &TermVerdict, vars: &[String]) -> String {
    match v {
        TermVerdict::Terminating(rs) => {
            format!("terminating with {}", rs.iter().map(|r| r.render(vars)).collect::<Vec<_>>().join(", "))
        }
        TermVerdict::Unknown(RankCounter::Sample(s)) => format!(
            "unknown: no template ranks sample with transitions {}",
            s.trans.iter().map(|(a, b)| format!("{}->{}", fmt_state(a), fmt_state(b))).collect::<Vec<_>>().join(" ")
        ),
        TermVerdict::Unknown(RankCounter::Trace { trace, pair }) => {
            format!("unknown: trace {} with unordered positions {:?}", fmt_trace(trace), pair)
        }
        TermVerdict::Budget => "budget exhausted".into(),
    }
}

/// Remaining steps before termination, for reachable states; `None` if a reachable cycle exists.
pub fn remaining_steps(ts: &ExplicitTS) -> Option<BTreeMap<State, usize>> {
    let reach: BTreeSet<State> = ts.reachable().into_iter().collect();
    let mut memo: BTreeMap<State, usize> = BTreeMap::new();
    let mut on_stack: BTreeSet<State> = BTreeSet::new();
    fn go(
        ts: &ExplicitTS,
        s: &State,
        memo: &mut BTreeMap<State, usize>,
        on_stack: &mut BTreeSet<State>,
    ) -> Option<usize> {
        if let Some(v) = memo.get(s) {
            return Some(*v);
        }
        if !on_stack.insert(s.clone()) {
            return None;
        }
        let mut best = 0;
        for t in ts.successors(s) {
            best = best.max(go(ts, t, memo, on_stack)? + 1);
        }
        on_stack.remove(s);
        memo.insert(s.clone(), best);
        Some(best)
    }
    for s in &reach {
        go(ts, s, &mut memo, &mut on_stack)?;
    }
    Some(memo)
}

pub fn fmt_rank_value(v: &BigInt) -> String {
    fmt_rational(&Rational::from_integer(v.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ts::state;

    fn sys(states: &[i64], init: &[i64], trans: &[(i64, i64)]) -> ExplicitTS {
        ExplicitTS::new(
            vec!["x".into()],
            states.iter().map(|&v| state(&[v])),
            init.iter().map(|&v| state(&[v])),
            trans.iter().map(|&(a, b)| (state(&[a]), state(&[b]))),
            [],
        )
        .unwrap()
    }

    fn countdown() -> ExplicitTS {
        let t: Vec<(i64, i64)> = (1..=5).map(|v| (v, v - 1)).collect();
        sys(&[0, 1, 2, 3, 4, 5], &[0, 1, 2, 3, 4, 5], &t)
    }

    fn tr(v: &[i64]) -> Vec<State> {
        v.iter().map(|&x| state(&[x])).collect()
    }

    fn x() -> RankingTemplate {
        RankingTemplate::new(vec![1], 0)
    }

    #[test]
    fn template_eval_clamps() {
        let r = RankingTemplate::new(vec![-1], 2);
        assert_eq!(r.eval(&state(&[5])), BigInt::zero());
        assert_eq!(r.eval(&state(&[0])), BigInt::from(2));
        assert_eq!(r.render(&["x".into()]), "max(-x + 2, 0)");
    }

    #[test]
    fn l_t_ice_examples() {
        assert_eq!(l_t_ice(&Sample::default(), &x()), Outcome::POS);
        let s = Sample { init: [state(&[3])].into(), trans: [(state(&[3]), state(&[2])), (state(&[2]), state(&[1]))].into(), bad: BTreeSet::new() };
        assert_eq!(l_t_ice(&s, &x()), Outcome::POS);
        let s = Sample { init: [state(&[0])].into(), trans: [(state(&[0]), state(&[0]))].into(), bad: BTreeSet::new() };
        assert_eq!(l_t_ice(&s, &x()), Outcome::NEG);
    }

    #[test]
    fn l_t_cegar_examples() {
        assert_eq!(l_t_cegar(&tr(&[3, 2, 1]), &[x()]), Outcome::POS);
        assert_eq!(l_t_cegar(&tr(&[0, 0]), &[x(), RankingTemplate::new(vec![-1], 3)]), Outcome::NEG);
        assert_eq!(l_t_cegar(&tr(&[2, 0, 1]), &[x()]), Outcome::NEG);
        assert_eq!(l_t_cegar(&tr(&[2, 0, 1]), &[x(), RankingTemplate::new(vec![-1], 3)]), Outcome::POS);
    }

    #[test]
    fn dual_check_examples() {
        assert_eq!(dual_check(&countdown(), RankWitness::Single(&x())), RankCheck::Pass);
        let lp = sys(&[0], &[0], &[(0, 0)]);
        assert_eq!(
            dual_check(&lp, RankWitness::Dwf(&[x()])),
            RankCheck::Counter(RankCounter::Trace { trace: tr(&[0, 0]), pair: (0, 1) })
        );
        let cyc = sys(&[2, 3], &[3], &[(3, 2), (2, 3)]);
        match dual_check(&cyc, RankWitness::Dwf(&[x()])) {
            RankCheck::Counter(RankCounter::Trace { trace, pair: (i, j) }) => {
                assert_eq!((trace[i].clone(), trace[j].clone()), (state(&[2]), state(&[3])));
            }
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn synthesis_examples() {
        let pool = template_pool(1, 1, 0);
        let got = synthesize_for_trace(&tr(&[3, 2, 1]), &pool, 2).unwrap();
        assert_eq!(got.iter().map(|&i| pool[i].clone()).collect::<Vec<_>>(), vec![x()]);
        assert_eq!(synthesize_for_trace(&tr(&[0, 0]), &pool, 2), None);
        let s = Sample {
            init: [state(&[0])].into(),
            trans: [(0, 1), (1, 2), (2, 0)].iter().map(|&(a, b)| (state(&[a]), state(&[b]))).collect(),
            bad: BTreeSet::new(),
        };
        assert_eq!(synthesize_for_sample(&s, &template_pool(1, 3, 3)), None);
        let p2 = template_pool(1, 1, 3);
        let got = synthesize_for_trace(&tr(&[2, 0, 1]), &p2, 2).unwrap();
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn countdown_terminates_both_ways() {
        let pool = template_pool(1, 1, 1);
        for m in [TermMethod::Ice, TermMethod::Cegar] {
            let r = run_termination(&countdown(), &pool, m, &TermConfig::default());
            match &r.verdict {
                TermVerdict::Terminating(rs) => {
                    assert_eq!(rs, &vec![x()]);
                    assert_eq!(dual_check(&countdown(), RankWitness::Dwf(rs)), RankCheck::Pass);
                }
                v => panic!("{v:?}"),
            }
        }
    }

    #[test]
    fn self_loop_is_never_certified() {
        let lp = sys(&[0, 1], &[1], &[(1, 0), (0, 0)]);
        let pool = template_pool(1, 2, 2);
        for m in [TermMethod::Ice, TermMethod::Cegar] {
            match run_termination(&lp, &pool, m, &TermConfig::default()).verdict {
                TermVerdict::Unknown(RankCounter::Sample(s)) => assert!(s.trans.contains(&(state(&[0]), state(&[0])))),
                TermVerdict::Unknown(RankCounter::Trace { trace, pair: (i, j) }) => assert_eq!(trace[i], trace[j]),
                v => panic!("{v:?}"),
            }
        }
    }

    #[test]
    fn remaining_steps_ranks_countdown() {
        let m = remaining_steps(&countdown()).unwrap();
        assert_eq!(m[&state(&[5])], 5);
        assert!(remaining_steps(&sys(&[0], &[0], &[(0, 0)])).is_none());
    }
}
