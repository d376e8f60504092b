//! Predicate-abstraction refinement on a counter that starts at 0 and only grows.

use pdverify::cegar::{describe, run_cegar, CegarConfig};
use pdverify::ts::{parse_pool, parse_system};

const POOL: &str = "(pool (0 (>= x 0) (<= x 0)) (1 (>= x -1) (<= x -1) (>= x 1) (<= x 1)) (2 (>= x -2) (<= x 2)) (3 (>= x -3) (<= x 3)))";

fn main() {
    let pool = parse_pool(POOL).unwrap();
    for bad in [-3, 3] {
        let src = format!("(system :vars (x) :init (= x 0) :trans (= x' (+ x 1)) :bad (= x {bad}))");
        let sys = parse_system(&src).unwrap();
        let report = run_cegar(&sys, &pool, &CegarConfig::default());
        println!("bad state x = {bad}: {} ({} iterations)", describe(&report.verdict), report.iterations);
    }
}
