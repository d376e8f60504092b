//! ICE learning: the teacher is the dual check, the learner the primal one.
//!
//! `X` is the set of samples `(I', T', B')`, accumulated by union; `Y` is a
//! stratified pool of hypotheses.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::cegar::Report;
use crate::lagrangian::{
    run_primal_dual, trace_to_json, Check, CheckCtx, EngineConfig, EngineError, Lagrangian, Outcome, Side, Verdict,
};
use crate::ts::{fmt_state, invariant_check, ExplicitTS, InvCheck, Predicate, Sample, State, System, Witness};

/// `1` iff `p` is an inductive invariant of the sampled subsystem.
pub fn l_ice(vars: &[String], sample: &Sample, p: &Predicate) -> Outcome {
    let h = |s: &State| p.holds(vars, s);
    let ok = sample.init.iter().all(h)
        && sample.trans.iter().all(|(a, b)| !h(a) || h(b))
        && sample.bad.iter().all(|s| !h(s));
    Outcome::from_bool(ok)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TeacherAnswer {
    Pass,
    Counter(Sample),
    /// The hypothesis cannot be decided on this system.
    Undecided(String),
}

fn one_fact(w: Witness<State>, kind: crate::ts::ViolationKind) -> Sample {
    let mut s = Sample::default();
    match (kind, w) {
        (crate::ts::ViolationKind::Initiation, Witness::State(x)) => {
            s.init.insert(x);
        }
        (crate::ts::ViolationKind::Safety, Witness::State(x)) => {
            s.bad.insert(x);
        }
        (_, Witness::Transition(a, b)) => {
            s.trans.insert((a, b));
        }
        (k, w) => unreachable!("{k:?} violation with witness {w:?}"),
    }
    s
}

/// Every fact of an explicit system that `p` violates.
fn all_violations(e: &ExplicitTS, p: &Predicate) -> Sample {
    let h = |s: &State| p.holds(e.vars(), s);
    Sample {
        init: e.init().iter().filter(|s| !h(s)).cloned().collect(),
        trans: e.trans().iter().filter(|(a, b)| h(a) && !h(b)).cloned().collect(),
        bad: e.bad().iter().filter(|s| h(s)).cloned().collect(),
    }
}

/// Teacher: passes an inductive hypothesis, otherwise returns violated facts
/// (one per round unless `batch` is set and the system is explicit).
pub fn teacher(sys: &System, p: &Predicate, batch: bool) -> TeacherAnswer {
    if let (true, System::Explicit(e)) = (batch, sys) {
        let v = all_violations(e, p);
        return if v.is_empty() { TeacherAnswer::Pass } else { TeacherAnswer::Counter(v) };
    }
    match invariant_check(sys, std::slice::from_ref(p)) {
        Ok(InvCheck::Inductive) => TeacherAnswer::Pass,
        Ok(InvCheck::Violation(kind, w)) => TeacherAnswer::Counter(one_fact(w, kind)),
        Err(e) => TeacherAnswer::Undecided(e.to_string()),
    }
}

/// Pool indices in learner order: by stratum, then pool order.
pub fn learner_order(pool: &[Predicate]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.sort_by_key(|&i| pool[i].stratum);
    idx
}

/// The first hypothesis (smallest stratum) consistent with the sample.
pub fn learner(vars: &[String], sample: &Sample, pool: &[Predicate]) -> Option<usize> {
    learner_order(pool).into_iter().find(|&i| l_ice(vars, sample, &pool[i]).is_positive())
}

#[derive(Clone, Debug)]
pub struct IceConfig {
    pub max_iterations: usize,
    pub batch: bool,
    pub seed: u64,
}

impl Default for IceConfig {
    fn default() -> Self {
        IceConfig { max_iterations: 100, batch: false, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IceVerdict {
    Safe(Predicate),
    Unknown(Sample),
    Budget,
}

pub struct IceLagrangian<'a> {
    pub sys: &'a System,
    pub pool: &'a [Predicate],
    pub batch: bool,
}

pub fn render_sample(s: &Sample) -> Value {
    json!({
        "init": s.init.iter().map(fmt_state).collect::<Vec<_>>(),
        "trans": s.trans.iter().map(|(a, b)| [fmt_state(a), fmt_state(b)]).collect::<Vec<_>>(),
        "bad": s.bad.iter().map(fmt_state).collect::<Vec<_>>(),
    })
}

impl Lagrangian for IceLagrangian<'_> {
    type X = Sample;
    type Y = usize;

    fn evaluate(&self, x: &Sample, y: &usize) -> Outcome {
        l_ice(self.sys.vars(), x, &self.pool[*y])
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
        match teacher(self.sys, &self.pool[*beta], self.batch) {
            TeacherAnswer::Pass => Check::Pass,
            TeacherAnswer::Counter(s) => Check::Counter(s),
            TeacherAnswer::Undecided(m) => Check::Stuck(m),
        }
    }

    fn primal_check(&self, alpha: &Sample, _ctx: &mut CheckCtx<'_>) -> Check<usize> {
        match learner(self.sys.vars(), alpha, self.pool) {
            None => Check::Pass,
            Some(i) => Check::Counter(i),
        }
    }

    fn join_x(&self, a: &Sample, b: &Sample) -> Option<Sample> {
        Some(a.join(b))
    }

    fn has_join_x(&self) -> bool {
        true
    }

    fn stratum_y(&self, y: &usize) -> Option<usize> {
        Some(self.pool[*y].stratum)
    }

    fn render_x(&self, x: &Sample) -> Value {
        render_sample(x)
    }

    fn render_y(&self, y: &usize) -> Value {
        json!(self.pool[*y].name)
    }
}

/// ICE: the learner proposes, the teacher answers with samples.
pub fn run_ice(sys: &System, pool: &[Predicate], cfg: &IceConfig) -> Report<IceVerdict> {
    if pool.is_empty() || cfg.max_iterations == 0 {
        let verdict = if pool.is_empty() { IceVerdict::Unknown(Sample::default()) } else { IceVerdict::Budget };
        return Report { verdict, trace: json!([]), iterations: 0 };
    }
    let l = IceLagrangian { sys, pool, batch: cfg.batch };
    let ecfg = EngineConfig {
        accumulate_x: true,
        max_iterations: cfg.max_iterations,
        start_side: Side::Primal,
        smallest_stratum: true,
        random_seed: cfg.seed,
        ..Default::default()
    };
    match run_primal_dual(&l, &ecfg) {
        Ok(run) => {
            let verdict = match run.verdict {
                Verdict::DualWitness(b) => IceVerdict::Safe(pool[b].clone()),
                Verdict::PrimalWitness(a) => IceVerdict::Unknown(a),
                Verdict::Budget => IceVerdict::Budget,
            };
            Report { verdict, trace: trace_to_json(&l, &run.trace), iterations: run.trace.len() }
        }
        Err(EngineError::Oracle { trace, .. }) => {
            let s = trace.records.last().and_then(|r| r.alpha.clone()).unwrap_or_default();
            Report { verdict: IceVerdict::Unknown(s), trace: trace_to_json(&l, &trace), iterations: trace.len() }
        }
        Err(EngineError::Config(m)) => unreachable!("engine configuration is fixed here: {m}"),
    }
}

/// Does the sample contain an initial-to-bad path through its own transitions?
pub fn sample_has_error_path(s: &Sample) -> bool {
    let mut seen: BTreeSet<&State> = s.init.iter().collect();
    let mut frontier: Vec<&State> = seen.iter().copied().collect();
    while let Some(x) = frontier.pop() {
        for (a, b) in &s.trans {
            if a == x && seen.insert(b) {
                frontier.push(b);
            }
        }
    }
    seen.iter().any(|x| s.bad.contains(*x))
}

/// The idealized instance on an explicit system: `X` = every subsample of
/// the full sample, `Y` = every state subset.
pub struct IdealIce {
    vars: Vec<String>,
    facts: Vec<Sample>,
    subsets: Vec<Predicate>,
}

impl IdealIce {
    pub fn new(e: &ExplicitTS) -> Self {
        let full = Sample { init: e.init().clone(), trans: e.trans().clone(), bad: e.bad().clone() };
        let mut facts = Vec::new();
        for s in &full.init {
            facts.push(Sample { init: [s.clone()].into(), ..Default::default() });
        }
        for t in &full.trans {
            facts.push(Sample { trans: [t.clone()].into(), ..Default::default() });
        }
        for s in &full.bad {
            facts.push(Sample { bad: [s.clone()].into(), ..Default::default() });
        }
        let st = e.states();
        let subsets = (0u32..1 << st.len())
            .map(|m| {
                let set: BTreeSet<State> = (0..st.len()).filter(|i| m >> i & 1 == 1).map(|i| st[i].clone()).collect();
                Predicate::explicit(&format!("S{m}"), set, m.count_ones() as usize)
            })
            .collect();
        IdealIce { vars: e.vars().to_vec(), facts, subsets }
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }
}

impl Lagrangian for IdealIce {
    type X = Sample;
    type Y = usize;

    fn evaluate(&self, x: &Sample, y: &usize) -> Outcome {
        l_ice(&self.vars, x, &self.subsets[*y])
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

    fn dual_check(&self, _b: &usize, _c: &mut CheckCtx<'_>) -> Check<Sample> {
        Check::Stuck("oracle-only instance".into())
    }

    fn primal_check(&self, _a: &Sample, _c: &mut CheckCtx<'_>) -> Check<usize> {
        Check::Stuck("oracle-only instance".into())
    }

    fn enumerate_x(&self) -> Option<Vec<Sample>> {
        let n = self.facts.len();
        Some(
            (0u64..1 << n)
                .map(|m| {
                    (0..n).filter(|i| m >> i & 1 == 1).fold(Sample::default(), |acc, i| acc.join(&self.facts[i]))
                })
                .collect(),
        )
    }

    fn enumerate_y(&self) -> Option<Vec<usize>> {
        Some((0..self.subsets.len()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lra::parse_formula;
    use crate::ts::{parse_system, state};

    fn t0() -> System {
        parse_system("(system :vars (x) :init (= x 0) :trans (= x' (+ x 1)) :bad (= x -3) :domain 6)").unwrap()
    }

    fn p(src: &str, stratum: usize) -> Predicate {
        Predicate::symbolic(parse_formula(src).unwrap(), stratum)
    }

    fn sample(init: &[i64], trans: &[(i64, i64)], bad: &[i64]) -> Sample {
        Sample {
            init: init.iter().map(|&v| state(&[v])).collect(),
            trans: trans.iter().map(|&(a, b)| (state(&[a]), state(&[b]))).collect(),
            bad: bad.iter().map(|&v| state(&[v])).collect(),
        }
    }

    fn vars() -> Vec<String> {
        vec!["x".into()]
    }

    #[test]
    fn l_ice_examples() {
        assert_eq!(l_ice(&vars(), &Sample::default(), &p("true", 0)), Outcome::POS);
        assert_eq!(l_ice(&vars(), &sample(&[], &[], &[-3]), &p("false", 0)), Outcome::POS);
        let s3 = sample(&[0], &[(0, 1), (1, 2), (-1, 0)], &[-3]);
        assert_eq!(l_ice(&vars(), &s3, &p("(= (mod x 2) 0)", 1)), Outcome::NEG);
    }

    #[test]
    fn teacher_examples() {
        let t = t0();
        assert_eq!(teacher(&t, &p("(> x -2)", 0), false), TeacherAnswer::Pass);
        assert_eq!(teacher(&t, &p("false", 0), false), TeacherAnswer::Counter(sample(&[0], &[], &[])));
        assert_eq!(teacher(&t, &p("true", 0), false), TeacherAnswer::Counter(sample(&[], &[], &[-3])));
        assert_eq!(
            teacher(&t, &p("(= (mod x 2) 0)", 0), false),
            TeacherAnswer::Counter(sample(&[], &[(0, 1)], &[]))
        );
    }

    #[test]
    fn learner_examples() {
        let pool = vec![p("true", 0), p("false", 0), p("(= (mod x 2) 0)", 1), p("(> x -2)", 2)];
        assert_eq!(learner(&vars(), &Sample::default(), &pool), Some(0));
        assert_eq!(learner(&vars(), &sample(&[0], &[], &[-3]), &pool), Some(2));
        assert_eq!(learner(&vars(), &sample(&[5], &[], &[5]), &pool), None);
    }

    #[test]
    fn t0_is_safe() {
        let t = t0();
        let mut pool = vec![p("true", 0), p("false", 0), p("(= (mod x 2) 0)", 1)];
        for c in -4..=4i64 {
            pool.push(p(&format!("(> x {c})"), c.unsigned_abs() as usize));
        }
        let r = run_ice(&t, &pool, &IceConfig::default());
        match r.verdict {
            IceVerdict::Safe(q) => {
                assert_eq!(invariant_check(&t, &[q]).unwrap(), InvCheck::Inductive)
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn empty_pool_is_unknown() {
        assert_eq!(run_ice(&t0(), &[], &IceConfig::default()).verdict, IceVerdict::Unknown(Sample::default()));
    }

    #[test]
    fn unsafe_system_sample_embeds_error() {
        let s = parse_system("(system :states (0 1 2 3) :init (0) :trans ((0 1) (1 2) (2 0) (1 3)) :bad (3))").unwrap();
        let System::Explicit(e) = &s else { panic!() };
        let st = e.states();
        let pool: Vec<Predicate> = (0u32..16)
            .map(|m| {
                let set = (0..4).filter(|i| m >> i & 1 == 1).map(|i| st[i].clone()).collect();
                Predicate::explicit(&format!("S{m}"), set, m.count_ones() as usize)
            })
            .collect();
        for batch in [false, true] {
            match run_ice(&s, &pool, &IceConfig { batch, ..Default::default() }).verdict {
                IceVerdict::Unknown(x) => {
                    assert!(sample_has_error_path(&x));
                    assert!(s.contains_sample(&x));
                }
                v => panic!("{v:?}"),
            }
        }
    }
}
