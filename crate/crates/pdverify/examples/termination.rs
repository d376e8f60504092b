//! Ranking-function synthesis by both termination methods.

use pdverify::termination::{describe, run_termination, template_pool, TermConfig, TermMethod};
use pdverify::ts::{parse_system, System};

fn main() {
    let src = "(system :vars (x) :init (>= x 0) :trans (and (> x 0) (= x' (- x 1))) :bad false)";
    let System::Symbolic(sys) = parse_system(src).unwrap() else { unreachable!() };
    let ts = sys.to_explicit(8);
    let pool = template_pool(1, 1, 1);
    for method in [TermMethod::Ice, TermMethod::Cegar] {
        let r = run_termination(&ts, &pool, method, &TermConfig::default());
        println!("countdown, {method:?}: {} ({} iterations)", describe(&r.verdict, &sys.vars), r.iterations);
    }

    let spin = parse_system("(system :states (0 1) :init (0) :trans ((0 1) (1 1)) :bad ())").unwrap();
    let System::Explicit(spin) = spin else { unreachable!() };
    let r = run_termination(&spin, &pool, TermMethod::Cegar, &TermConfig::default());
    println!("self-loop: {}", describe(&r.verdict, &["x".to_string()]));
}
