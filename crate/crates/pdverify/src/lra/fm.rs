//! Satisfiability by DNF expansion and Fourier–Motzkin elimination with exact strictness.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use super::{Assignment, Atom, Formula, Leaf, LinTerm, Prenex, Rational, Rel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sat {
    Sat(Assignment),
    Unsat,
}

impl Sat {
    pub fn is_sat(&self) -> bool {
        matches!(self, Sat::Sat(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    CounterModel(Assignment),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

type LeafModel = BTreeMap<Leaf, Rational>;

/// Decide a quantifier-free formula over ℚ. `mod` leaves, if any, are treated as opaque variables.
pub fn qf_sat(f: &Formula) -> Sat {
    let mut conj = Vec::new();
    match search(vec![f], &mut conj) {
        None => Sat::Unsat,
        Some(m) => {
            let mut a: Assignment = m
                .into_iter()
                .filter_map(|(l, v)| match l {
                    Leaf::Var(x) => Some((x, v)),
                    Leaf::Mod(..) => None,
                })
                .collect();
            for v in f.vars() {
                a.entry(v).or_insert_with(Rational::zero);
            }
            Sat::Sat(a)
        }
    }
}

/// Satisfiability of a conjunction of atoms.
pub fn conj_sat(atoms: &[Atom]) -> Sat {
    qf_sat(&Formula::and(atoms.iter().cloned().map(Formula::Atom).collect()))
}

fn search(mut pending: Vec<&Formula>, conj: &mut Vec<Atom>) -> Option<LeafModel> {
    while let Some(f) = pending.pop() {
        match f {
            Formula::True => {}
            Formula::False => return None,
            Formula::Atom(a) => {
                conj.push(a.clone());
                let r = search(pending, conj);
                conj.pop();
                return r;
            }
            Formula::And(v) => pending.extend(v.iter()),
            Formula::Or(v) => {
                for g in v {
                    let mut p = pending.clone();
                    p.push(g);
                    if let Some(m) = search(p, conj) {
                        return Some(m);
                    }
                }
                return None;
            }
        }
    }
    solve(conj.iter().map(|a| (a.term.clone(), a.rel)).collect())
}

fn leaves(cons: &[(LinTerm, Rel)]) -> BTreeSet<Leaf> {
    cons.iter().flat_map(|(t, _)| t.coeffs.keys().cloned()).collect()
}

fn eval_leaves(t: &LinTerm, m: &LeafModel) -> Rational {
    let mut v = t.constant.clone();
    for (l, c) in &t.coeffs {
        if let Some(x) = m.get(l) {
            v += c * x;
        }
    }
    v
}

fn normalize(cons: Vec<(LinTerm, Rel)>) -> Option<Vec<(LinTerm, Rel)>> {
    let mut set = BTreeSet::new();
    for (t, r) in cons {
        match Atom::from_term(t, r) {
            Formula::True => {}
            Formula::Atom(a) => {
                set.insert((a.term, a.rel));
            }
            _ => return None,
        }
    }
    Some(set.into_iter().collect())
}

fn solve(cons: Vec<(LinTerm, Rel)>) -> Option<LeafModel> {
    let cons = normalize(cons)?;
    let ls = leaves(&cons);
    if ls.is_empty() {
        return Some(LeafModel::new());
    }

    // Equalities first: solve for one leaf and substitute it away.
    if let Some(i) = cons.iter().position(|(_, r)| *r == Rel::Eq) {
        let (e, _) = &cons[i];
        let (x, c) = e.coeffs.iter().next().map(|(l, c)| (l.clone(), c.clone())).unwrap();
        let rest: Vec<(LinTerm, Rel)> = cons
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (t, r))| {
                let a = t.coeffs.get(&x).cloned().unwrap_or_else(Rational::zero);
                (t.sub(&e.scale(&(a / &c))), *r)
            })
            .collect();
        let mut m = solve(rest)?;
        fill_defaults(&mut m, &ls, &x);
        // c·x + rest = 0
        let mut r = e.clone();
        r.coeffs.remove(&x);
        let v = -eval_leaves(&r, &m) / c;
        m.insert(x, v);
        return Some(m);
    }

    // Eliminate the leaf that minimizes the number of generated constraints.
    let x = ls
        .iter()
        .min_by_key(|l| {
            let (mut lo, mut up) = (0usize, 0usize);
            for (t, _) in &cons {
                match t.coeffs.get(*l) {
                    Some(c) if c.is_positive() => up += 1,
                    Some(_) => lo += 1,
                    None => {}
                }
            }
            lo * up
        })
        .unwrap()
        .clone();

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut other = Vec::new();
    for (t, r) in &cons {
        match t.coeffs.get(&x) {
            Some(c) if c.is_positive() => upper.push((t.clone(), *r, c.clone())),
            Some(c) => lower.push((t.clone(), *r, c.clone())),
            None => other.push((t.clone(), *r)),
        }
    }
    for (tl, rl, cl) in &lower {
        for (tu, ru, cu) in &upper {
            // cu·tl + (−cl)·tu has no x; strict if either side is.
            let t = tl.scale(cu).add(&tu.scale(&-cl.clone()));
            let r = if *rl == Rel::Lt || *ru == Rel::Lt { Rel::Lt } else { Rel::Le };
            other.push((t, r));
        }
    }
    let mut m = solve(other)?;
    fill_defaults(&mut m, &ls, &x);

    // Bounds on x under m: c·x + rest ⋈ 0  ⇒  x ⋈ −rest/c (flipped for c < 0).
    let bound = |t: &LinTerm, c: &Rational| {
        let mut rest = t.clone();
        rest.coeffs.remove(&x);
        -eval_leaves(&rest, &m) / c
    };
    let lb = tightest(lower.iter().map(|(t, r, c)| (bound(t, c), *r == Rel::Lt)), true);
    let ub = tightest(upper.iter().map(|(t, r, c)| (bound(t, c), *r == Rel::Lt)), false);
    let v = pick_value(lb, ub);
    m.insert(x, v);
    Some(m)
}

fn fill_defaults(m: &mut LeafModel, ls: &BTreeSet<Leaf>, except: &Leaf) {
    for l in ls {
        if l != except {
            m.entry(l.clone()).or_insert_with(Rational::zero);
        }
    }
}

/// Greatest lower (or least upper) bound; strict wins ties.
fn tightest(it: impl Iterator<Item = (Rational, bool)>, lower: bool) -> Option<(Rational, bool)> {
    let mut best: Option<(Rational, bool)> = None;
    for (v, s) in it {
        best = Some(match best {
            None => (v, s),
            Some((b, bs)) => {
                let better = if lower { v > b } else { v < b };
                if better {
                    (v, s)
                } else if v == b {
                    (b, bs || s)
                } else {
                    (b, bs)
                }
            }
        });
    }
    best
}

fn fits(v: &Rational, lb: &Option<(Rational, bool)>, ub: &Option<(Rational, bool)>) -> bool {
    let ok_lo = match lb {
        None => true,
        Some((b, s)) => v > b || (!s && v == b),
    };
    let ok_hi = match ub {
        None => true,
        Some((b, s)) => v < b || (!s && v == b),
    };
    ok_lo && ok_hi
}

/// A point of the interval, preferring 0, then the integer nearest 0, then a closed end, then the midpoint.
pub(super) fn pick_value(lb: Option<(Rational, bool)>, ub: Option<(Rational, bool)>) -> Rational {
    let zero = Rational::zero();
    if fits(&zero, &lb, &ub) {
        return zero;
    }
    if let Some((b, s)) = &lb {
        if !b.is_negative() {
            let mut c = b.ceil();
            if *s && c == *b {
                c += Rational::from_integer(1.into());
            }
            if fits(&c, &lb, &ub) {
                return c;
            }
        }
    }
    if let Some((b, s)) = &ub {
        if !b.is_positive() {
            let mut c = b.floor();
            if *s && c == *b {
                c -= Rational::from_integer(1.into());
            }
            if fits(&c, &lb, &ub) {
                return c;
            }
        }
    }
    match (&lb, &ub) {
        (Some((b, false)), _) => b.clone(),
        (_, Some((b, false))) => b.clone(),
        (Some((l, _)), Some((u, _))) => (l + u) / Rational::from_integer(2.into()),
        _ => unreachable!("a one-sided interval always contains an integer"),
    }
}

/// Validity of a universally quantified formula: the negated matrix must be unsatisfiable.
pub fn forall_validity(p: &Prenex) -> Validity {
    assert!(p.is_universal(), "forall_validity needs a purely universal prefix");
    match qf_sat(&p.matrix.negate()) {
        Sat::Unsat => Validity::Valid,
        Sat::Sat(mut m) => {
            for (_, v) in &p.prefix {
                m.entry(v.clone()).or_insert_with(Rational::zero);
            }
            Validity::CounterModel(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lra::{parse_formula, parse_prenex, q};

    #[test]
    fn strict_cycle_is_unsat() {
        assert_eq!(qf_sat(&parse_formula("(and (< x y) (< y x))").unwrap()), Sat::Unsat);
        assert!(qf_sat(&parse_formula("(and (<= x y) (<= y x))").unwrap()).is_sat());
        assert_eq!(qf_sat(&parse_formula("(and (<= x y) (< y x))").unwrap()), Sat::Unsat);
    }

    #[test]
    fn interval_model_is_left_end() {
        match qf_sat(&parse_formula("(and (<= x 3) (<= 2 x))").unwrap()) {
            Sat::Sat(m) => assert_eq!(m["x"], q(2)),
            Sat::Unsat => panic!(),
        }
    }

    #[test]
    fn equalities_and_disjunctions() {
        let f = parse_formula("(and (= (+ x y) 1) (or (< x 0) (< 5 x)) (<= 0 y))").unwrap();
        match qf_sat(&f) {
            Sat::Sat(m) => assert!(f.eval(&m).unwrap()),
            Sat::Unsat => panic!(),
        }
        let g = parse_formula("(and (= (+ x y) 1) (= (+ x y) 2))").unwrap();
        assert_eq!(qf_sat(&g), Sat::Unsat);
    }

    #[test]
    fn open_interval_uses_midpoint() {
        let f = parse_formula("(and (< 1/3 x) (< x 1/2))").unwrap();
        match qf_sat(&f) {
            Sat::Sat(m) => assert!(f.eval(&m).unwrap()),
            Sat::Unsat => panic!(),
        }
    }

    #[test]
    fn validity_examples() {
        let v = parse_prenex(
            "(forall (x z) (and (or (< (+ x 1) 1) (< (* 2 -2) (+ x 1))) (or (< z (+ x 1)) (< x z))))",
        )
        .unwrap();
        assert_eq!(forall_validity(&v), Validity::Valid);
        assert_eq!(forall_validity(&parse_prenex("(forall (x) (<= x x))").unwrap()), Validity::Valid);
        match forall_validity(&parse_prenex("(forall (x) (< x 0))").unwrap()) {
            Validity::CounterModel(m) => assert_eq!(m["x"], q(0)),
            Validity::Valid => panic!(),
        }
    }
}
