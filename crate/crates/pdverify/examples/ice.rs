//! Learning an inductive invariant from implication counterexamples.

use pdverify::ice::{run_ice, IceConfig, IceVerdict};
use pdverify::ts::{fmt_state, invariant_check, parse_pool, parse_system, InvCheck, Predicate, Witness};

const POOL: &str = "(pool (0 true false (> x 0)) (1 (> x -1) (> x 1) (= (mod x 2) 0)) (2 (> x -2) (> x 2)))";

fn main() {
    let sys = parse_system("(system :vars (x) :init (= x 0) :trans (= x' (+ x 1)) :bad (= x -3) :domain 6)").unwrap();
    let pool = parse_pool(POOL).unwrap();
    let report = run_ice(&sys, &pool, &IceConfig::default());
    match &report.verdict {
        IceVerdict::Safe(p) => println!("invariant {} after {} iterations", p.name, report.iterations),
        v => println!("{v:?}"),
    }
    println!("trace: {}", report.trace);

    // Parity holds initially but is not preserved by the increment; `:domain` lets the
    // checker enumerate states for `mod`.
    let parity = pool.iter().find(|p: &&Predicate| p.name.contains("mod")).unwrap();
    match invariant_check(&sys, std::slice::from_ref(parity)) {
        Ok(InvCheck::Violation(kind, Witness::Transition(s, t))) => {
            println!("{} fails {} on {} -> {}", parity.name, kind.name(), fmt_state(&s), fmt_state(&t))
        }
        other => println!("{}: {other:?}", parity.name),
    }
}
