//! Invariants checked on random instances.
//!
//! Structured objects come from the crate's own generators seeded by proptest.

mod common;

use std::collections::BTreeSet;

use pdverify::cli::{Certificate, Problem};
use pdverify::fixpoint::{bounded_semantics_oracle, fine_pools, l_fix, random_problem, run_fix, FixConfig, FixLagrangian, FixVerdict};
use pdverify::houdini::{random_pair, validate_pair, PairCheck};
use pdverify::ice::l_ice;
use pdverify::lagrangian::{brute_force_optima, run_primal_dual, EngineConfig, Verdict};
use pdverify::qlra::{l_fk, parse_skeleton, random_sentence, random_skeleton, skeleton_join, skeleton_leq, SkSide};
use pdverify::termination::{template_pool, RankingTemplate};
use pdverify::ts::{explicit_error_search, ranking_product, Predicate, ProductWitness, Reach, Sample, State, System};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_table() -> impl Strategy<Value = Vec<Vec<i32>>> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(nx, ny)| prop::collection::vec(prop::collection::vec(-1i32..=1, ny), nx))
}

fn random_sample(rng: &mut ChaCha8Rng, states: &[State]) -> Sample {
    let pick = |rng: &mut ChaCha8Rng| states[rng.gen_range(0..states.len())].clone();
    let mut s = Sample::default();
    for _ in 0..rng.gen_range(0..3) {
        s.init.insert(pick(rng));
    }
    for _ in 0..rng.gen_range(0..3) {
        s.bad.insert(pick(rng));
    }
    for _ in 0..rng.gen_range(0..4) {
        let a = pick(rng);
        s.trans.insert((a, pick(rng)));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_optimum_never_exceeds_primal(table in small_table()) {
        let l = pdverify::lagrangian::TableLagrangian::new(table);
        let (primal, dual) = brute_force_optima(&l).unwrap();
        prop_assert!(dual <= primal);
    }

    #[test]
    fn accumulating_y_never_repeats_a_candidate(seed: u64) {
        let l = monotone_instance(&mut rng(seed));
        let cfg = EngineConfig { accumulate_y: true, random_seed: seed, max_iterations: 64, ..Default::default() };
        let run = run_primal_dual(&l, &cfg).unwrap();
        prop_assert!(!run.trace.repeats_beta());
        prop_assert!(run.verdict != Verdict::Budget);
    }

    #[test]
    fn stratified_search_stays_within_the_low_strata(seed: u64, n in 0usize..=3) {
        let (l, bound) = stratified_instance(&mut rng(seed), n);
        let cfg = EngineConfig { accumulate_x: true, smallest_stratum: true, random_seed: seed, max_iterations: 200, ..Default::default() };
        let run = run_primal_dual(&l, &cfg).unwrap();
        prop_assert!(matches!(run.verdict, Verdict::DualWitness(_)));
        prop_assert!(run.trace.len() <= bound);
    }

    #[test]
    fn larger_samples_never_raise_l_ice(seed: u64) {
        let mut r = rng(seed);
        let states: Vec<State> = (0..4).map(|v| pdverify::ts::state(&[v])).collect();
        let a = random_sample(&mut r, &states);
        let b = a.join(&random_sample(&mut r, &states));
        let members: BTreeSet<State> = states.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
        let p = Predicate::explicit("p", members, 0);
        let vars = vec!["x".to_string()];
        prop_assert!(l_ice(&vars, &b, &p) <= l_ice(&vars, &a, &p));
    }

    #[test]
    fn skeletons_survive_rendering(seed: u64, sat: bool) {
        let mut r = rng(seed);
        let phi = random_sentence(&mut r, 3);
        let side = if sat { SkSide::Sat } else { SkSide::Unsat };
        let sk = random_skeleton(&mut r, &phi, side, 2);
        prop_assert_eq!(parse_skeleton(&sk.render(side)).unwrap(), sk);
    }

    #[test]
    fn l_fk_is_monotone_in_both_skeletons(seed: u64) {
        let mut r = rng(seed);
        let phi = random_sentence(&mut r, 3);
        let p = random_skeleton(&mut r, &phi, SkSide::Sat, 2);
        let p2 = skeleton_join(&p, &random_skeleton(&mut r, &phi, SkSide::Sat, 2)).unwrap();
        let q = random_skeleton(&mut r, &phi, SkSide::Unsat, 2);
        let q2 = skeleton_join(&q, &random_skeleton(&mut r, &phi, SkSide::Unsat, 2)).unwrap();
        prop_assert!(skeleton_leq(&p, &p2) && skeleton_leq(&q, &q2));
        prop_assert!(l_fk(&q, &phi, &p).unwrap() <= l_fk(&q, &phi, &p2).unwrap());
        prop_assert!(l_fk(&q2, &phi, &p).unwrap() <= l_fk(&q, &phi, &p).unwrap());
    }

    #[test]
    fn houdini_pairs_are_well_formed(seed: u64, n in 2usize..=4, k in 1usize..=3) {
        let pair = random_pair(&mut rng(seed), n, k);
        prop_assert_eq!(validate_pair(&pair), PairCheck::Ok);
    }

    #[test]
    fn product_search_matches_direct_decrease(seed: u64, i in 0usize..64, j in 0usize..64) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let ts = random_explicit(&mut r, n, 0.25);
        let pool = template_pool(1, 1, 1);
        let (a, b) = (pool[i % pool.len()].clone(), pool[j % pool.len()].clone());
        let single = ranking_product(&ts, ProductWitness::Single(&a)).search() == Reach::Safe;
        prop_assert_eq!(single, step_pairs(&ts).iter().all(|(s, t)| decreases(std::slice::from_ref(&a), s, t)));
        let rs: Vec<RankingTemplate> = vec![a, b];
        let dwf = ranking_product(&ts, ProductWitness::Dwf(&rs)).search() == Reach::Safe;
        prop_assert_eq!(dwf, closure_pairs(&ts).iter().all(|(s, t)| decreases(&rs, s, t)));
    }

    #[test]
    fn explicit_verdicts_come_with_accepted_certificates(seed: u64) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let ts = random_explicit(&mut r, n, 0.25);
        let cert = match explicit_error_search(&ts) {
            Reach::Safe => Certificate::Invariant(Predicate::explicit("reach", reachable(&ts), 0)),
            Reach::Trace(t) => Certificate::ErrorTrace(t),
        };
        let problem = Problem::System(System::Explicit(ts));
        prop_assert_eq!(accepted(&problem, &cert), Ok(()));
        let back = Certificate::parse(&cert.render(&problem), &problem).unwrap();
        prop_assert_eq!(accepted(&problem, &back), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn l_fix_is_monotone_over_small_choices(seed: u64) {
        let problem = random_problem(&mut rng(seed), 3);
        let cfg = FixConfig { pools: fine_pools(3), max_candidates: 12, ..FixConfig::default() };
        let l = FixLagrangian::new(&problem, &cfg);
        let with_ends = |side| {
            let mut v = l.small(side);
            v.push(l.top(side));
            v.push(l.bottom(side));
            v
        };
        let (xs, ys) = (with_ends(SkSide::Unsat), with_ends(SkSide::Sat));
        let value = |x, y| l_fix(&problem, x, y).unwrap();
        for x in &xs {
            for a in &ys {
                for b in ys.iter().filter(|b| a.leq(b)) {
                    prop_assert!(value(x, a) <= value(x, b));
                }
            }
        }
        for y in &ys {
            for a in &xs {
                for b in xs.iter().filter(|b| a.leq(b)) {
                    prop_assert!(value(b, y) <= value(a, y));
                }
            }
        }
    }

    #[test]
    fn fixpoint_verdicts_agree_with_the_bounded_oracle(seed: u64) {
        let problem = random_problem(&mut rng(seed), 4);
        let truth = bounded_semantics_oracle(&problem, 4).unwrap();
        let cfg = FixConfig { pools: fine_pools(4), ..FixConfig::default() };
        match run_fix(&problem, &cfg).unwrap().verdict {
            FixVerdict::Valid(_) => prop_assert!(truth),
            FixVerdict::Invalid(_) => prop_assert!(!truth),
            FixVerdict::Budget => {}
        }
    }
}
