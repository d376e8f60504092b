//! The generic loop on a hand-written instance: find an upper bound for a fixed data set.
//!
//! `X` ranges over the data points, `Y` over candidate bounds, `L(x, u) = 1` iff `x ≤ u`.
//! Bounds join by `max`, so accumulating `Y` climbs to the largest point.

use pdverify::lagrangian::{
    brute_force_optima, run_primal_dual, trace_to_json, Check, CheckCtx, EngineConfig, GapLagrangian, Lagrangian,
    Outcome, TableLagrangian, Verdict,
};

struct UpperBound {
    data: Vec<i64>,
}

impl Lagrangian for UpperBound {
    type X = i64;
    type Y = i64;

    fn evaluate(&self, x: &i64, u: &i64) -> Outcome {
        Outcome::from_bool(x <= u)
    }

    fn range(&self) -> Vec<i32> {
        vec![-1, 1]
    }

    fn initial_x(&self) -> i64 {
        self.data[0]
    }

    fn initial_y(&self) -> i64 {
        i64::MIN
    }

    fn dual_check(&self, u: &i64, _: &mut CheckCtx<'_>) -> Check<i64> {
        match self.data.iter().find(|x| *x > u) {
            Some(x) => Check::Counter(*x),
            None => Check::Pass,
        }
    }

    // Some bound always covers `x`, so the primal side never wins.
    fn primal_check(&self, x: &i64, _: &mut CheckCtx<'_>) -> Check<i64> {
        Check::Counter(*x)
    }

    fn join_y(&self, a: &i64, b: &i64) -> Option<i64> {
        Some(*a.max(b))
    }

    fn has_join_y(&self) -> bool {
        true
    }
}

fn main() {
    let l = UpperBound { data: vec![3, -4, 17, 8, 11] };
    let cfg = EngineConfig { accumulate_y: true, ..EngineConfig::default() };
    let run = run_primal_dual(&l, &cfg).expect("valid configuration");
    match &run.verdict {
        Verdict::DualWitness(u) => println!("bound {u} after {} iterations", run.trace.len()),
        v => println!("unexpected verdict {v:?}"),
    }
    println!("{}", serde_json::to_string_pretty(&trace_to_json(&l, &run.trace)).unwrap());

    // Finite tables can be solved by brute force; the loop must agree with the optima.
    let table = TableLagrangian::new(vec![vec![1, -1, 0], vec![1, 1, -1], vec![1, 0, 1]]);
    let (primal, dual) = brute_force_optima(&table).unwrap();
    println!("table: primal optimum {primal}, dual optimum {dual}");
    let run = run_primal_dual(&table, &EngineConfig::default()).unwrap();
    println!("table: {:?} in {} iterations", run.verdict, run.trace.len());

    // With a duality gap neither side can ever win.
    let gap = GapLagrangian::default();
    let (lo, hi) = gap.local_optima(20);
    println!("gap instance: optima ({lo}, {hi})");
    let run = run_primal_dual(&gap, &EngineConfig { max_iterations: 50, ..EngineConfig::default() }).unwrap();
    println!("gap instance: {:?} after {} iterations", run.verdict, run.trace.len());
}
