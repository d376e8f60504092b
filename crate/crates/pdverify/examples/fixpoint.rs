//! Fixpoint-logic validity with ranking templates and Skolem choices.

use pdverify::fixpoint::{bounded_semantics_oracle, describe, parse_fix_problem, run_fix, FixConfig, FixPools};

const PROBLEMS: [(&str, &str, i64); 3] = [
    ("countdown", "(define (P x) :mu (or (<= x 0) (P (- x 1)))) (query (forall (x) (P x)))", 16),
    (
        "control",
        "(define (P x) :mu (forall (i) (and (=> (or (< x 42) (= i 0)) true) \
         (=> (and (>= x 42) (not (= i 0))) (or (P (+ x i)) (P (- x i))))))) (query (forall (x) (P x)))",
        64,
    ),
    ("free choice", "(define (P x) :mu (exists (z) (P z))) (query (P 0))", 16),
];

fn main() {
    for (name, src, bound) in PROBLEMS {
        let problem = parse_fix_problem(src).unwrap();
        let cfg = FixConfig { pools: FixPools { domain_bound: bound, ..FixPools::default() }, ..FixConfig::default() };
        let report = run_fix(&problem, &cfg).unwrap();
        println!("{name}: {}", describe(&problem, &report.verdict));
        println!("  bounded semantics at {}: {:?}", bound.min(16), bounded_semantics_oracle(&problem, bound.min(16)));
    }
}
