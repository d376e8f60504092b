//! Houdini-style conjunctive invariant search driven by an induction-dual system.

use pdverify::houdini::{houdini_fixpoint, parse_pair, random_pair, run_pd_houdini, validate_pair, HoudiniConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PAIR: &str = "
(pair :t (system :states (0 1 2) :init (0) :trans ((0 1) (1 1)) :bad (2))
      :preds ((a 0 1) (b 0))
      :ti-init (()) :ti-trans ((() (a))) :ti-bad ((a)))";

fn main() {
    let pair = parse_pair(PAIR).unwrap();
    println!("pair check: {:?}", validate_pair(&pair));
    let report = run_pd_houdini(&pair, &HoudiniConfig::default()).unwrap();
    println!("verdict: {:?} after {} iterations", report.verdict, report.iterations);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let pair = random_pair(&mut rng, 4, 3);
        let preds: Vec<_> = (0..pair.base.len())
            .map(|j| pair.t.states().iter().filter(|s| pair.sat(s, 1 << j)).cloned().collect())
            .collect();
        let fix = houdini_fixpoint(&pair.t, &preds);
        let report = run_pd_houdini(&pair, &HoudiniConfig::default()).unwrap();
        println!("random pair: fixpoint keeps {:?} (safe: {}), search says {:?}", fix.invariant, fix.safe, report.verdict);
    }
}
