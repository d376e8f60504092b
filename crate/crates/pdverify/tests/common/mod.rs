//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use pdverify::cli::{check_certificate, CertCheck, Certificate, Problem};
use pdverify::houdini::{conj_inductive, DualPair, Mask};
use pdverify::lagrangian::TableLagrangian;
use pdverify::lra::{q, Rational};
use pdverify::termination::RankingTemplate;
use pdverify::ts::{state, ExplicitTS, State};
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn load(name: &str) -> Problem {
    Problem::load(&data(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Accept, or the rejection reason.
pub fn accepted(problem: &Problem, cert: &Certificate) -> Result<(), String> {
    match check_certificate(problem, cert) {
        Ok(CertCheck::Accept) => Ok(()),
        Ok(CertCheck::Reject(r)) => Err(format!("{} rejected: {r}", cert.render(problem))),
        Err(e) => Err(format!("{}: {e}", cert.render(problem))),
    }
}

/// `|X|, |Y| ≤ 6` with entries in `{-1, 0, 1}`.
pub fn random_table<R: Rng>(rng: &mut R) -> TableLagrangian {
    let nx = rng.gen_range(1..=6);
    let ny = rng.gen_range(1..=6);
    TableLagrangian::new((0..nx).map(|_| (0..ny).map(|_| rng.gen_range(-1..=1)).collect()).collect())
}

fn or_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|a| (0..n).map(|b| a | b).collect()).collect()
}

/// `Y` = subsets of `k` items under union; `L(x, y) = 1` iff `y` covers one of `x`'s generators.
pub fn monotone_instance<R: Rng>(rng: &mut R) -> TableLagrangian {
    let k = rng.gen_range(1..=5);
    let ny = 1usize << k;
    let nx = rng.gen_range(1..=6);
    let table = (0..nx)
        .map(|_| {
            let gens: Vec<usize> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..ny)).collect();
            (0..ny).map(|y| if gens.iter().any(|g| y & g == *g) { 1 } else { -1 }).collect()
        })
        .collect();
    let mut l = TableLagrangian::new(table);
    l.join_y = Some(or_table(ny));
    l
}

/// `X` = subsets of `k` facts under union, `L(x, y) = -1` iff `x` hits the kill set of `y`,
/// and one `y` at stratum `n` kills nothing. Returns the instance and `|Y≤n|`.
pub fn stratified_instance<R: Rng>(rng: &mut R, n: usize) -> (TableLagrangian, usize) {
    let k = rng.gen_range(1..=4);
    let nx = 1usize << k;
    let mut strata = Vec::new();
    for s in 0..=n + 2 {
        let size = if s <= n { rng.gen_range(1..=12usize.min(50 / (n + 1))) } else { rng.gen_range(0..=5) };
        strata.extend(std::iter::repeat_n(s, size));
    }
    let ny = strata.len();
    let low = strata.iter().filter(|s| **s <= n).count();
    let witness_at: Vec<usize> = (0..ny).filter(|y| strata[*y] == n).collect();
    let witness = witness_at[rng.gen_range(0..witness_at.len())];
    let kill: Vec<usize> = (0..ny).map(|y| if y == witness { 0 } else { rng.gen_range(1..nx) }).collect();
    let table = (0..nx).map(|x| (0..ny).map(|y| if x & kill[y] != 0 { -1 } else { 1 }).collect()).collect();
    let mut l = TableLagrangian::new(table);
    l.join_x = Some(or_table(nx));
    l.strata_y = Some(strata);
    (l, low)
}

/// `Y` = subsets of `m` stratified items under union, stratum = the largest item stratum,
/// `L` monotone on `Y` with a positive witness of stratum `n`. Returns the instance and
/// the height bound `|{items of stratum ≤ n}| + 1`.
pub fn lattice_instance<R: Rng>(rng: &mut R, n: usize) -> (TableLagrangian, usize) {
    let m = rng.gen_range(n + 1..=7);
    let item_stratum: Vec<usize> = (0..m).map(|i| if i <= n { i } else { rng.gen_range(0..=n + 2) }).collect();
    let ny = 1usize << m;
    let low_items: usize = (0..m).filter(|i| item_stratum[*i] <= n).fold(0, |a, i| a | 1 << i);
    // A witness inside the low items that contains item `n`, so its stratum is exactly `n`.
    let witness = (rng.gen_range(0..ny) & low_items) | 1 << n;
    let nx = rng.gen_range(1..=6);
    let table = (0..nx)
        .map(|_| {
            let mut gens: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..ny)).collect();
            gens.push(witness & rng.gen_range(0..ny));
            (0..ny).map(|y| if gens.iter().any(|g| y & g == *g) { 1 } else { -1 }).collect()
        })
        .collect();
    let strata = (0..ny).map(|y| (0..m).filter(|i| y >> i & 1 == 1).map(|i| item_stratum[i]).max().unwrap_or(0)).collect();
    let mut l = TableLagrangian::new(table);
    l.join_y = Some(or_table(ny));
    l.strata_y = Some(strata);
    (l, low_items.count_ones() as usize + 1)
}

/// One-variable system on states `0..n` with random initial, bad and transition sets.
pub fn random_explicit<R: Rng>(rng: &mut R, n: usize, p_trans: f64) -> ExplicitTS {
    let states: Vec<State> = (0..n as i64).map(|v| state(&[v])).collect();
    let init: Vec<State> = states.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
    let bad: Vec<State> = states.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
    let mut trans = Vec::new();
    for a in &states {
        for b in &states {
            if rng.gen_bool(p_trans) {
                trans.push((a.clone(), b.clone()));
            }
        }
    }
    ExplicitTS::new(vec!["x".into()], states, init, trans, bad).unwrap()
}

/// Every system on states `0..n` whose transition relation and initial set are given by bitmasks.
pub fn all_systems(n: usize) -> impl Iterator<Item = ExplicitTS> {
    let states: Vec<State> = (0..n as i64).map(|v| state(&[v])).collect();
    (0u32..1 << (n * n)).flat_map(move |tm| {
        let states = states.clone();
        (1u32..1 << n).map(move |im| {
            let trans: Vec<(State, State)> = (0..n * n)
                .filter(|b| tm >> b & 1 == 1)
                .map(|b| (states[b / n].clone(), states[b % n].clone()))
                .collect();
            let init: Vec<State> = (0..n).filter(|i| im >> i & 1 == 1).map(|i| states[i].clone()).collect();
            ExplicitTS::new(vec!["x".into()], states.clone(), init, trans, Vec::<State>::new()).unwrap()
        })
    })
}

pub fn reachable(ts: &ExplicitTS) -> BTreeSet<State> {
    ts.reachable().into_iter().collect()
}

/// Pairs `(s, t)` with `s` reachable and `t` reachable from `s` in one or more steps.
pub fn closure_pairs(ts: &ExplicitTS) -> BTreeSet<(State, State)> {
    let mut out = BTreeSet::new();
    for s in reachable(ts) {
        let mut seen = BTreeSet::new();
        let mut frontier: Vec<State> = ts.successors(&s).to_vec();
        while let Some(t) = frontier.pop() {
            if seen.insert(t.clone()) {
                frontier.extend(ts.successors(&t).iter().cloned());
            }
        }
        out.extend(seen.into_iter().map(|t| (s.clone(), t)));
    }
    out
}

/// Reachable transitions.
pub fn step_pairs(ts: &ExplicitTS) -> BTreeSet<(State, State)> {
    let reach = reachable(ts);
    ts.trans().iter().filter(|(a, _)| reach.contains(a)).cloned().collect()
}

/// `max(a·s + b, 0)`, computed over rationals.
pub fn rank_value(r: &RankingTemplate, s: &State) -> Rational {
    let v = r.coeffs.iter().zip(s).fold(q(r.offset), |acc, (a, x)| acc + q(*a) * x);
    if v > q(0) {
        v
    } else {
        q(0)
    }
}

pub fn decreases(rs: &[RankingTemplate], s: &State, t: &State) -> bool {
    rs.iter().any(|r| rank_value(r, s) > rank_value(r, t))
}

/// The largest subset of `0..k` whose conjunction is inductive, by trying every subset.
pub fn max_inductive_subset(ts: &ExplicitTS, k: usize, sat: impl Fn(&State, usize) -> bool) -> BTreeSet<usize> {
    let mut best: BTreeSet<usize> = BTreeSet::new();
    for m in 0u32..1 << k {
        let c: Vec<usize> = (0..k).filter(|i| m >> i & 1 == 1).collect();
        if conj_inductive(ts, &c, |s, i| sat(s, *i), false) {
            best.extend(c);
        }
    }
    best
}

/// Every path `p₀ → … → pₗ` of the dual system starting in an initial mask, `l ≤ max_len`.
pub fn ti_paths(pair: &DualPair, max_len: usize) -> Vec<Vec<Mask>> {
    let mut out: Vec<Vec<Mask>> = pair.ti.init().iter().map(|m| vec![*m]).collect();
    let mut layer = out.clone();
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|p| pair.ti.successors(p.last().unwrap()).iter().map(move |n| [p.clone(), vec![*n]].concat()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
