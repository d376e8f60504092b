//! Quantified linear real arithmetic by alternating strategy skeletons.

use pdverify::lra::{fmt_model, forall_validity, parse_prenex, Validity};
use pdverify::qlra::{describe, l_fk, parse_skeleton, project, run_fk, FkConfig, SkSide};

fn main() {
    let phi = parse_prenex("(exists (w) (forall (x) (exists (y) (forall (z) (and (or (< y 1) (< (* 2 w) y)) (or (< z y) (< x z)))))))");
    let phi = phi.expect("well-formed sentence");
    let report = run_fk(&phi, &FkConfig::default()).unwrap();
    println!("{phi}\n  {} after {} iterations", describe(&report.verdict), report.iterations);

    // A weak strategy for the existential player and a refutation of it.
    let weak = parse_skeleton("(choose (0 (forall x (choose (x (forall z *)) ((* 2 x) (forall z *))))))").unwrap();
    match forall_validity(&project(&phi, &weak, SkSide::Sat).unwrap()) {
        Validity::CounterModel(m) => println!("weak strategy fails at {}", fmt_model(&m)),
        v => println!("weak strategy: {v:?}"),
    }
    let rho = parse_skeleton("(exists w (choose (-1 (exists y (choose (y *) ((/ (+ w y) 2) *))))))").unwrap();
    println!("game value against the refutation: {}", l_fk(&rho, &phi, &weak).unwrap());
}
