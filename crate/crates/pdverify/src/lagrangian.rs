//! Lagrangians `L: X × Y → P` and the generic primal-dual search loop.
//!
//! An instance owns both witness checks; the engine only alternates them,
//! accumulates candidates through the optional joins and records a trace.

use std::fmt::Debug;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

/// A value in the finite codomain `P ⊂ ℤ`. The threshold is always 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome(i32);

impl Outcome {
    pub const NEG: Outcome = Outcome(-1);
    pub const ZERO: Outcome = Outcome(0);
    pub const POS: Outcome = Outcome(1);

    pub fn new(value: i32) -> Self {
        Outcome(value)
    }

    pub fn value(self) -> i32 {
        self.0
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Outcome::POS
        } else {
            Outcome::NEG
        }
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of a dual (`inf_x L(x, β) ≥ 0`) or primal (`sup_y L(α, y) ≤ 0`) witness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check<C> {
    /// The candidate is a witness.
    Pass,
    /// A counter from the opposite side that defeats the candidate.
    Counter(C),
    /// The check could neither confirm nor refute (e.g. a finite pool ran dry).
    Stuck(String),
}

/// Hints handed to the witness checks.
pub struct CheckCtx<'a> {
    pub smallest_stratum: bool,
    pub rng: &'a mut ChaCha8Rng,
}

pub trait Lagrangian {
    type X: Clone + Debug + PartialEq;
    type Y: Clone + Debug + PartialEq;

    fn evaluate(&self, x: &Self::X, y: &Self::Y) -> Outcome;

    /// The declared codomain, ascending, containing 0.
    fn range(&self) -> Vec<i32> {
        vec![-1, 0, 1]
    }

    fn initial_x(&self) -> Self::X;
    fn initial_y(&self) -> Self::Y;

    /// `Pass` iff no `x` has `L(x, β) < 0`; otherwise some `δ` with `L(δ, β) < 0`.
    fn dual_check(&self, beta: &Self::Y, ctx: &mut CheckCtx<'_>) -> Check<Self::X>;

    /// `Pass` iff no `y` has `L(α, y) > 0`; otherwise some `γ` with `L(α, γ) > 0`.
    fn primal_check(&self, alpha: &Self::X, ctx: &mut CheckCtx<'_>) -> Check<Self::Y>;

    fn join_x(&self, _a: &Self::X, _b: &Self::X) -> Option<Self::X> {
        None
    }
    fn join_y(&self, _a: &Self::Y, _b: &Self::Y) -> Option<Self::Y> {
        None
    }
    fn has_join_x(&self) -> bool {
        false
    }
    fn has_join_y(&self) -> bool {
        false
    }
    fn stratum_y(&self, _y: &Self::Y) -> Option<usize> {
        None
    }
    fn stratum_x(&self, _x: &Self::X) -> Option<usize> {
        None
    }
    fn enumerate_x(&self) -> Option<Vec<Self::X>> {
        None
    }
    fn enumerate_y(&self) -> Option<Vec<Self::Y>> {
        None
    }

    fn render_x(&self, x: &Self::X) -> Value {
        Value::String(format!("{x:?}"))
    }
    fn render_y(&self, y: &Self::Y) -> Value {
        Value::String(format!("{y:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Primal,
    Dual,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub accumulate_x: bool,
    pub accumulate_y: bool,
    pub max_iterations: usize,
    pub start_side: Side,
    pub smallest_stratum: bool,
    pub random_seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            accumulate_x: false,
            accumulate_y: false,
            max_iterations: 100,
            start_side: Side::Dual,
            smallest_stratum: false,
            random_seed: 0,
        }
    }
}

/// One loop iteration: the candidates checked and the counters obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<X, Y> {
    pub iter: usize,
    pub beta: Option<Y>,
    pub delta: Option<X>,
    pub alpha: Option<X>,
    pub gamma: Option<Y>,
    pub dual_ok: Option<bool>,
    pub primal_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace<X, Y> {
    pub records: Vec<IterationRecord<X, Y>>,
}

impl<X: PartialEq, Y: PartialEq> IterationTrace<X, Y> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Every β that went through a dual check, in order.
    pub fn betas(&self) -> Vec<&Y> {
        self.records.iter().filter_map(|r| r.beta.as_ref()).collect()
    }

    /// Every α that went through a primal check, in order.
    pub fn alphas(&self) -> Vec<&X> {
        self.records.iter().filter_map(|r| r.alpha.as_ref()).collect()
    }

    pub fn repeats_beta(&self) -> bool {
        has_repeat(&self.betas())
    }

    pub fn repeats_alpha(&self) -> bool {
        has_repeat(&self.alphas())
    }
}

fn has_repeat<T: PartialEq>(v: &[&T]) -> bool {
    v.iter()
        .enumerate()
        .any(|(i, a)| v[i + 1..].iter().any(|b| a == b))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<X, Y> {
    DualWitness(Y),
    PrimalWitness(X),
    Budget,
}

#[derive(Clone, Debug)]
pub struct Run<X, Y> {
    pub verdict: Verdict<X, Y>,
    pub trace: IterationTrace<X, Y>,
}

#[derive(Debug, Error)]
pub enum EngineError<X: Debug, Y: Debug> {
    #[error("engine configuration: {0}")]
    Config(String),
    #[error("{side:?} check stuck at iteration {iteration}: {reason}")]
    Oracle {
        iteration: usize,
        side: Side,
        reason: String,
        trace: IterationTrace<X, Y>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("instance does not enumerate X and Y")]
pub struct NotEnumerable;

pub type RunResult<L> = Result<Run<<L as Lagrangian>::X, <L as Lagrangian>::Y>, EngineError<<L as Lagrangian>::X, <L as Lagrangian>::Y>>;

/// Alternate dual and primal witness checks until one passes or the budget runs out.
pub fn run_primal_dual<L: Lagrangian>(
    l: &L,
    cfg: &EngineConfig,
) -> RunResult<L> {
    if cfg.max_iterations == 0 {
        return Err(EngineError::Config("max_iterations must be at least 1".into()));
    }
    if cfg.accumulate_x && !l.has_join_x() {
        return Err(EngineError::Config("accumulate_x without join on X".into()));
    }
    if cfg.accumulate_y && !l.has_join_y() {
        return Err(EngineError::Config("accumulate_y without join on Y".into()));
    }
    if cfg.smallest_stratum {
        let probe = l.initial_y();
        if l.stratum_y(&probe).is_none() && l.stratum_x(&l.initial_x()).is_none() {
            return Err(EngineError::Config("smallest_stratum without strata".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.random_seed);
    let mut alpha = l.initial_x();
    let mut beta = l.initial_y();
    let mut trace = IterationTrace { records: Vec::new() };
    // When starting on the primal side, the first dual check is skipped.
    let mut skip_dual = cfg.start_side == Side::Primal;

    for iter in 1..=cfg.max_iterations {
        let mut rec = IterationRecord {
            iter,
            beta: None,
            delta: None,
            alpha: None,
            gamma: None,
            dual_ok: None,
            primal_ok: None,
        };

        if !skip_dual {
            rec.beta = Some(beta.clone());
            let mut ctx = CheckCtx { smallest_stratum: cfg.smallest_stratum, rng: &mut rng };
            match l.dual_check(&beta, &mut ctx) {
                Check::Pass => {
                    rec.dual_ok = Some(true);
                    trace.records.push(rec);
                    return Ok(Run { verdict: Verdict::DualWitness(beta), trace });
                }
                Check::Counter(delta) => {
                    rec.dual_ok = Some(false);
                    alpha = if cfg.accumulate_x {
                        l.join_x(&alpha, &delta).expect("join_x advertised")
                    } else {
                        delta.clone()
                    };
                    rec.delta = Some(delta);
                }
                Check::Stuck(reason) => {
                    trace.records.push(rec);
                    return Err(EngineError::Oracle { iteration: iter, side: Side::Dual, reason, trace });
                }
            }
        }
        skip_dual = false;

        rec.alpha = Some(alpha.clone());
        let mut ctx = CheckCtx { smallest_stratum: cfg.smallest_stratum, rng: &mut rng };
        match l.primal_check(&alpha, &mut ctx) {
            Check::Pass => {
                rec.primal_ok = Some(true);
                trace.records.push(rec);
                return Ok(Run { verdict: Verdict::PrimalWitness(alpha), trace });
            }
            Check::Counter(gamma) => {
                rec.primal_ok = Some(false);
                beta = if cfg.accumulate_y {
                    l.join_y(&beta, &gamma).expect("join_y advertised")
                } else {
                    gamma.clone()
                };
                rec.gamma = Some(gamma);
            }
            Check::Stuck(reason) => {
                trace.records.push(rec);
                return Err(EngineError::Oracle { iteration: iter, side: Side::Primal, reason, trace });
            }
        }
        trace.records.push(rec);
    }
    Ok(Run { verdict: Verdict::Budget, trace })
}

/// `(inf_x sup_y L, sup_y inf_x L)` by exhaustive enumeration.
pub fn brute_force_optima<L: Lagrangian>(l: &L) -> Result<(Outcome, Outcome), NotEnumerable> {
    let xs = l.enumerate_x().ok_or(NotEnumerable)?;
    let ys = l.enumerate_y().ok_or(NotEnumerable)?;
    let range = l.range();
    let (lo, hi) = (Outcome(range[0]), Outcome(*range.last().unwrap()));
    // Empty sides follow the usual conventions: inf ∅ = top, sup ∅ = bottom.
    let primal = xs
        .iter()
        .map(|x| ys.iter().map(|y| l.evaluate(x, y)).max().unwrap_or(lo))
        .min()
        .unwrap_or(hi);
    let dual = ys
        .iter()
        .map(|y| xs.iter().map(|x| l.evaluate(x, y)).min().unwrap_or(hi))
        .max()
        .unwrap_or(lo);
    assert!(dual <= primal, "weak duality violated: dual {dual} > primal {primal}");
    Ok((primal, dual))
}

/// JSON array of `{iter, side, candidate, counter, outcome}` objects.
pub fn trace_to_json<L: Lagrangian>(l: &L, trace: &IterationTrace<L::X, L::Y>) -> Value {
    let mut out = Vec::new();
    for r in &trace.records {
        if let Some(b) = &r.beta {
            out.push(json!({
                "iter": r.iter,
                "side": "dual",
                "candidate": l.render_y(b),
                "counter": r.delta.as_ref().map(|d| l.render_x(d)),
                "outcome": outcome_label(r.dual_ok),
            }));
        }
        if let Some(a) = &r.alpha {
            out.push(json!({
                "iter": r.iter,
                "side": "primal",
                "candidate": l.render_x(a),
                "counter": r.gamma.as_ref().map(|g| l.render_y(g)),
                "outcome": outcome_label(r.primal_ok),
            }));
        }
    }
    Value::Array(out)
}

fn outcome_label(ok: Option<bool>) -> &'static str {
    match ok {
        Some(true) => "pass",
        Some(false) => "counter",
        None => "stuck",
    }
}

/// A finite table Lagrangian with optional joins and strata, indices as values.
///
/// Used by the property tests and the engine example; checks enumerate the table.
#[derive(Clone, Debug)]
pub struct TableLagrangian {
    pub table: Vec<Vec<i32>>,
    pub join_x: Option<Vec<Vec<usize>>>,
    pub join_y: Option<Vec<Vec<usize>>>,
    pub strata_y: Option<Vec<usize>>,
    pub start: (usize, usize),
}

impl TableLagrangian {
    pub fn new(table: Vec<Vec<i32>>) -> Self {
        TableLagrangian { table, join_x: None, join_y: None, strata_y: None, start: (0, 0) }
    }

    fn nx(&self) -> usize {
        self.table.len()
    }

    fn ny(&self) -> usize {
        self.table.first().map_or(0, |r| r.len())
    }

    fn pick<T: Clone>(cands: &[T], ctx: &mut CheckCtx<'_>) -> T {
        use rand::Rng;
        cands[ctx.rng.gen_range(0..cands.len())].clone()
    }
}

impl Lagrangian for TableLagrangian {
    type X = usize;
    type Y = usize;

    fn evaluate(&self, x: &usize, y: &usize) -> Outcome {
        Outcome(self.table[*x][*y])
    }

    fn initial_x(&self) -> usize {
        self.start.0
    }

    fn initial_y(&self) -> usize {
        self.start.1
    }

    fn dual_check(&self, beta: &usize, ctx: &mut CheckCtx<'_>) -> Check<usize> {
        let c: Vec<usize> = (0..self.nx()).filter(|&x| self.table[x][*beta] < 0).collect();
        if c.is_empty() {
            Check::Pass
        } else {
            Check::Counter(Self::pick(&c, ctx))
        }
    }

    fn primal_check(&self, alpha: &usize, ctx: &mut CheckCtx<'_>) -> Check<usize> {
        let mut c: Vec<usize> = (0..self.ny()).filter(|&y| self.table[*alpha][y] > 0).collect();
        if c.is_empty() {
            return Check::Pass;
        }
        if ctx.smallest_stratum {
            if let Some(s) = &self.strata_y {
                let m = c.iter().map(|&y| s[y]).min().unwrap();
                c.retain(|&y| s[y] == m);
            }
        }
        Check::Counter(Self::pick(&c, ctx))
    }

    fn join_x(&self, a: &usize, b: &usize) -> Option<usize> {
        self.join_x.as_ref().map(|j| j[*a][*b])
    }
    fn join_y(&self, a: &usize, b: &usize) -> Option<usize> {
        self.join_y.as_ref().map(|j| j[*a][*b])
    }
    fn has_join_x(&self) -> bool {
        self.join_x.is_some()
    }
    fn has_join_y(&self) -> bool {
        self.join_y.is_some()
    }
    fn stratum_y(&self, y: &usize) -> Option<usize> {
        self.strata_y.as_ref().map(|s| s[*y])
    }
    fn enumerate_x(&self) -> Option<Vec<usize>> {
        Some((0..self.nx()).collect())
    }
    fn enumerate_y(&self) -> Option<Vec<usize>> {
        Some((0..self.ny()).collect())
    }
}

/// `L₁(x, y) = −1` iff `x ≥ y`, over `ℤ × ℤ`. Primal value 1, dual value −1.
///
/// With `bound = Some(k)` both sides are truncated to `−k..=k` for brute force.
#[derive(Clone, Debug, Default)]
pub struct GapLagrangian {
    pub bound: Option<i64>,
}

impl Lagrangian for GapLagrangian {
    type X = i64;
    type Y = i64;

    fn evaluate(&self, x: &i64, y: &i64) -> Outcome {
        Outcome::from_bool(x < y)
    }

    fn range(&self) -> Vec<i32> {
        vec![-1, 1]
    }

    fn initial_x(&self) -> i64 {
        0
    }

    fn initial_y(&self) -> i64 {
        0
    }

    fn dual_check(&self, beta: &i64, _ctx: &mut CheckCtx<'_>) -> Check<i64> {
        Check::Counter(*beta)
    }

    fn primal_check(&self, alpha: &i64, _ctx: &mut CheckCtx<'_>) -> Check<i64> {
        Check::Counter(alpha + 1)
    }

    fn join_x(&self, a: &i64, b: &i64) -> Option<i64> {
        Some(*a.max(b))
    }
    fn join_y(&self, a: &i64, b: &i64) -> Option<i64> {
        Some(*a.max(b))
    }
    fn has_join_x(&self) -> bool {
        true
    }
    fn has_join_y(&self) -> bool {
        true
    }
    fn enumerate_x(&self) -> Option<Vec<i64>> {
        self.bound.map(|k| (-k..=k).collect())
    }
    fn enumerate_y(&self) -> Option<Vec<i64>> {
        self.bound.map(|k| (-k..=k).collect())
    }
}

impl GapLagrangian {
    /// Optima over `−k..=k` where each inner sup/inf ranges over the window
    /// `v−1..=v+1` around the outer point, so no truncation boundary is hit.
    ///
    /// A plain finite truncation cannot keep the gap: primal 1 needs some
    /// `y > max X`, dual −1 needs some `x ≥ max Y`.
    pub fn local_optima(&self, k: i64) -> (Outcome, Outcome) {
        let primal = (-k..=k)
            .map(|x| (x - 1..=x + 1).map(|y| self.evaluate(&x, &y)).max().unwrap())
            .min()
            .unwrap();
        let dual = (-k..=k)
            .map(|y| (y - 1..=y + 1).map(|x| self.evaluate(&x, &y)).min().unwrap())
            .max()
            .unwrap();
        (primal, dual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one_passes_first_dual_check() {
        let l = TableLagrangian::new(vec![vec![1; 3]; 3]);
        let run = run_primal_dual(&l, &EngineConfig::default()).unwrap();
        assert_eq!(run.verdict, Verdict::DualWitness(0));
        assert_eq!(run.trace.len(), 1);
        assert_eq!(brute_force_optima(&l).unwrap(), (Outcome::POS, Outcome::POS));
    }

    #[test]
    fn gap_instance_runs_out_of_budget() {
        let cfg = EngineConfig { accumulate_y: true, max_iterations: 1000, ..Default::default() };
        let run = run_primal_dual(&GapLagrangian::default(), &cfg).unwrap();
        assert_eq!(run.verdict, Verdict::Budget);
        assert_eq!(run.trace.len(), 1000);
        assert!(!run.trace.repeats_beta());
    }

    #[test]
    fn gap_optima() {
        let l = GapLagrangian { bound: Some(2) };
        assert_eq!(l.local_optima(2), (Outcome::POS, Outcome::NEG));
        // The square truncation hits the boundary at x = 2 and closes the gap.
        assert_eq!(brute_force_optima(&l).unwrap(), (Outcome::NEG, Outcome::NEG));
    }

    #[test]
    fn accumulation_without_join_is_rejected() {
        let l = TableLagrangian::new(vec![vec![1]]);
        let cfg = EngineConfig { accumulate_y: true, ..Default::default() };
        assert!(matches!(run_primal_dual(&l, &cfg), Err(EngineError::Config(_))));
    }

    #[test]
    fn brute_force_needs_enumerators() {
        assert_eq!(brute_force_optima(&GapLagrangian::default()), Err(NotEnumerable));
    }

    #[test]
    fn primal_start_skips_first_dual_check() {
        // Row 0 is all negative: α = 0 is a primal witness immediately.
        let l = TableLagrangian::new(vec![vec![-1, -1], vec![1, 1]]);
        let cfg = EngineConfig { start_side: Side::Primal, ..Default::default() };
        let run = run_primal_dual(&l, &cfg).unwrap();
        assert_eq!(run.verdict, Verdict::PrimalWitness(0));
        assert!(run.trace.records[0].beta.is_none());
    }

    #[test]
    fn trace_json_has_schema_fields() {
        let l = TableLagrangian::new(vec![vec![-1, 1], vec![-1, 1]]);
        let run = run_primal_dual(&l, &EngineConfig::default()).unwrap();
        let j = trace_to_json(&l, &run.trace);
        for o in j.as_array().unwrap() {
            for k in ["iter", "side", "candidate", "counter", "outcome"] {
                assert!(o.get(k).is_some(), "missing {k}");
            }
        }
    }
}
