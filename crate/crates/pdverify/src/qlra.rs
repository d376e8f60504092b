//! Strategy-skeleton solving for prenex sentences of linear real arithmetic.
//!
//! A SAT skeleton answers every `∃` with a finite set of candidate terms and
//! passes every `∀`; an UNSAT skeleton does the opposite. Both are the same
//! tree type [`Skeleton`]; [`SkSide`] says who chooses. An UNSAT skeleton of
//! `φ` is exactly a SAT skeleton of `¬φ`, which is how the dual operations are
//! implemented.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cegar::Report;
use crate::lagrangian::{
    run_primal_dual, trace_to_json, Check, CheckCtx, EngineConfig, EngineError, Lagrangian, Outcome, Side, Verdict,
};
use crate::lra::{
    forall_validity, mbp_term, q, term_of, Assignment, Atom, Formula, LinTerm, LraError, Prenex, Quant, Rel, Validity,
};
use crate::sexp::{parse_one, ParseError, Sexp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QlraError {
    #[error("skeletons of different shape: {0}")]
    IncompatibleShape(String),
    #[error("skeleton does not fit the formula: {0}")]
    ShapeMismatch(String),
    #[error("not a counter-model of the projection: {0}")]
    NotACounterModel(String),
    #[error("not a closed sentence: free variables {0:?}")]
    NotASentence(Vec<String>),
    #[error(transparent)]
    Lra(#[from] LraError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Which player a skeleton belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SkSide {
    Sat,
    Unsat,
}

impl SkSide {
    /// The quantifier at which this side picks terms.
    pub fn chooser(self) -> Quant {
        match self {
            SkSide::Sat => Quant::Exists,
            SkSide::Unsat => Quant::Forall,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Skeleton {
    Leaf,
    /// The opponent's variable: `∀y.π` for SAT, `∃y.ρ` for UNSAT.
    Pass(String, Box<Skeleton>),
    /// Candidate terms with continuations, sorted by term.
    Choice(Vec<(LinTerm, Skeleton)>),
}

pub type SatSkeleton = Skeleton;
pub type UnsatSkeleton = Skeleton;

impl Skeleton {
    pub fn pass(y: &str, s: Skeleton) -> Skeleton {
        Skeleton::Pass(y.to_string(), Box::new(s))
    }

    /// A choice node; branches with equal terms are merged.
    pub fn choice(branches: Vec<(LinTerm, Skeleton)>) -> Result<Skeleton, QlraError> {
        let mut out: Vec<(LinTerm, Skeleton)> = Vec::new();
        for (t, s) in branches {
            match out.iter_mut().find(|(u, _)| *u == t) {
                Some((_, prev)) => *prev = skeleton_join(prev, &s)?,
                None => out.push((t, s)),
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Skeleton::Choice(out))
    }

    /// Substitute into every term. Branches are not merged, so this is only
    /// meant for evaluation.
    fn substitute(&self, x: &str, t: &LinTerm) -> Result<Skeleton, LraError> {
        Ok(match self {
            Skeleton::Leaf => Skeleton::Leaf,
            Skeleton::Pass(y, s) => Skeleton::Pass(y.clone(), Box::new(s.substitute(x, t)?)),
            Skeleton::Choice(bs) => Skeleton::Choice(
                bs.iter()
                    .map(|(u, s)| Ok((u.substitute(x, t)?, s.substitute(x, t)?)))
                    .collect::<Result<_, LraError>>()?,
            ),
        })
    }

    fn rename(&self, from: &str, to: &str) -> Skeleton {
        self.substitute(from, &LinTerm::var(to)).expect("renaming keeps sorts")
    }

    /// Every term occurring in the skeleton.
    pub fn terms(&self) -> BTreeSet<LinTerm> {
        let mut out = BTreeSet::new();
        self.walk_terms(&mut out);
        out
    }

    fn walk_terms(&self, out: &mut BTreeSet<LinTerm>) {
        match self {
            Skeleton::Leaf => {}
            Skeleton::Pass(_, s) => s.walk_terms(out),
            Skeleton::Choice(bs) => {
                for (t, s) in bs {
                    out.insert(t.clone());
                    s.walk_terms(out);
                }
            }
        }
    }

    /// Number of leaves.
    pub fn size(&self) -> usize {
        match self {
            Skeleton::Leaf => 1,
            Skeleton::Pass(_, s) => s.size(),
            Skeleton::Choice(bs) => bs.iter().map(|(_, s)| s.size()).sum(),
        }
    }

    /// S-expression form; `side` only picks the binder keyword.
    pub fn render(&self, side: SkSide) -> String {
        match self {
            Skeleton::Leaf => "*".into(),
            Skeleton::Pass(y, s) => {
                let kw = if side == SkSide::Sat { "forall" } else { "exists" };
                format!("({kw} {y} {})", s.render(side))
            }
            Skeleton::Choice(bs) => {
                let parts: Vec<String> = bs.iter().map(|(t, s)| format!("({t} {})", s.render(side))).collect();
                format!("(choose {})", parts.join(" "))
            }
        }
    }

    /// Compact notation, `0.∀x.((x.∀z.•) ⊔ (2x.∀z.•))`.
    pub fn pretty(&self, side: SkSide) -> String {
        match self {
            Skeleton::Leaf => "•".into(),
            Skeleton::Pass(y, s) => {
                let q = if side == SkSide::Sat { '∀' } else { '∃' };
                format!("{q}{y}.{}", s.pretty(side))
            }
            Skeleton::Choice(bs) if bs.len() == 1 => format!("{}.{}", pretty_term(&bs[0].0), bs[0].1.pretty(side)),
            Skeleton::Choice(bs) => {
                let op = if side == SkSide::Sat { " ⊔ " } else { " ⊓ " };
                let parts: Vec<String> =
                    bs.iter().map(|(t, s)| format!("({}.{})", pretty_term(t), s.pretty(side))).collect();
                format!("({})", parts.join(op))
            }
        }
    }
}

fn pretty_term(t: &LinTerm) -> String {
    let s = t.to_string();
    if s.starts_with('(') {
        format!("[{s}]")
    } else {
        s
    }
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(SkSide::Sat))
    }
}

/// Read the form written by [`Skeleton::render`]; `forall` and `exists` are interchangeable.
pub fn parse_skeleton(src: &str) -> Result<Skeleton, QlraError> {
    skeleton_of(&parse_one(src)?)
}

pub fn skeleton_of(e: &Sexp) -> Result<Skeleton, QlraError> {
    if e.as_atom() == Some("*") {
        return Ok(Skeleton::Leaf);
    }
    let items = e.expect_list("skeleton")?;
    match e.head() {
        Some("forall" | "exists") if items.len() == 3 => {
            let y = items[1].expect_atom("variable")?;
            Ok(Skeleton::pass(y, skeleton_of(&items[2])?))
        }
        Some("choose") => {
            let mut bs = Vec::new();
            for b in &items[1..] {
                let pair = b.expect_list("branch")?;
                if pair.len() != 2 {
                    return Err(ParseError::new(b.pos(), "branch is (term skeleton)").into());
                }
                bs.push((term_of(&pair[0])?, skeleton_of(&pair[1])?));
            }
            let n = bs.len();
            let sk = Skeleton::choice(bs)?;
            if matches!(&sk, Skeleton::Choice(v) if v.len() != n) {
                return Err(ParseError::new(e.pos(), "branch terms must be distinct").into());
            }
            Ok(sk)
        }
        _ => Err(ParseError::new(e.pos(), "expected *, (forall y s), (exists y s) or (choose (t s) ...)").into()),
    }
}

/// The typing judgment: does `sk` fit `phi` for `side`?
///
/// Terms may mention only the opponent's variables bound further out (and the
/// free variables of `phi`).
pub fn check_skeleton(phi: &Prenex, sk: &Skeleton, side: SkSide) -> bool {
    check_prefix(&phi.prefix, phi.free_vars(), sk, side)
}

/// The typing judgment over a bare prefix, with `scope` the variables bound outside it.
pub fn check_prefix(prefix: &[(Quant, String)], scope: BTreeSet<String>, sk: &Skeleton, side: SkSide) -> bool {
    check_rec(prefix, sk, side, scope)
}

fn check_rec(prefix: &[(Quant, String)], sk: &Skeleton, side: SkSide, mut scope: BTreeSet<String>) -> bool {
    let Some(((qn, x), rest)) = prefix.split_first() else {
        return *sk == Skeleton::Leaf;
    };
    if *qn == side.chooser() {
        let Skeleton::Choice(bs) = sk else { return false };
        let distinct: BTreeSet<&LinTerm> = bs.iter().map(|(t, _)| t).collect();
        !bs.is_empty()
            && distinct.len() == bs.len()
            && bs.iter().all(|(t, s)| {
                !t.has_mod() && t.vars().is_subset(&scope) && check_rec(rest, s, side, scope.clone())
            })
    } else {
        let Skeleton::Pass(y, s) = sk else { return false };
        if y != x {
            return false;
        }
        scope.insert(x.clone());
        check_rec(rest, s, side, scope)
    }
}

/// The preorder: `b` offers every choice of `a`, each with a larger continuation.
pub fn skeleton_leq(a: &Skeleton, b: &Skeleton) -> bool {
    match (a, b) {
        (Skeleton::Leaf, Skeleton::Leaf) => true,
        (Skeleton::Pass(x, s), Skeleton::Pass(y, t)) => x == y && skeleton_leq(s, t),
        (Skeleton::Choice(xs), Skeleton::Choice(ys)) => {
            xs.iter().all(|(t, s)| ys.iter().any(|(u, r)| t == u && skeleton_leq(s, r)))
        }
        _ => false,
    }
}

/// Least upper bound: equal terms merge recursively, other branches are added.
pub fn skeleton_join(a: &Skeleton, b: &Skeleton) -> Result<Skeleton, QlraError> {
    match (a, b) {
        (Skeleton::Leaf, Skeleton::Leaf) => Ok(Skeleton::Leaf),
        (Skeleton::Pass(x, s), Skeleton::Pass(y, t)) if x == y => Ok(Skeleton::pass(x, skeleton_join(s, t)?)),
        (Skeleton::Choice(xs), Skeleton::Choice(ys)) => Skeleton::choice(xs.iter().chain(ys).cloned().collect()),
        _ => Err(QlraError::IncompatibleShape(format!("{a} vs {b}"))),
    }
}

/// The quantifier-free formula a pair of skeletons induces, with the substitutions made.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Play {
    pub formula: Formula,
    pub log: Vec<String>,
}

impl Play {
    /// Ground truth value, if the formula is closed.
    pub fn value(&self) -> Option<bool> {
        if self.formula.vars().is_empty() {
            self.formula.eval(&Assignment::new()).ok()
        } else {
            None
        }
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.value().map(Outcome::from_bool)
    }
}

/// `⟨ρ | φ | π⟩`.
pub fn play(rho: &Skeleton, phi: &Prenex, pi: &Skeleton) -> Result<Play, QlraError> {
    let mut log = Vec::new();
    let formula = play_matrix(&phi.prefix, &phi.matrix, rho, pi, &mut log)?;
    Ok(Play { formula, log })
}

/// What a play needs from a quantifier-free body.
pub trait PlayMatrix: Sized + Clone {
    fn subst(&self, x: &str, t: &LinTerm) -> Result<Self, LraError>;
    fn conj(parts: Vec<Self>) -> Self;
    fn disj(parts: Vec<Self>) -> Self;
}

impl PlayMatrix for Formula {
    fn subst(&self, x: &str, t: &LinTerm) -> Result<Self, LraError> {
        self.substitute(x, t)
    }
    fn conj(parts: Vec<Self>) -> Self {
        Formula::and(parts)
    }
    fn disj(parts: Vec<Self>) -> Self {
        Formula::or(parts)
    }
}

/// The play over an explicit prefix and any body type.
pub fn play_matrix<M: PlayMatrix>(
    prefix: &[(Quant, String)],
    matrix: &M,
    rho: &Skeleton,
    pi: &Skeleton,
    log: &mut Vec<String>,
) -> Result<M, QlraError> {
    let mismatch = |what: &str| QlraError::ShapeMismatch(format!("{what}: {} against {}", rho, pi));
    let Some(((qn, x), rest)) = prefix.split_first() else {
        return match (rho, pi) {
            (Skeleton::Leaf, Skeleton::Leaf) => Ok(matrix.clone()),
            _ => Err(mismatch("leaf expected")),
        };
    };
    match (qn, rho, pi) {
        (Quant::Forall, Skeleton::Choice(bs), Skeleton::Pass(y, inner)) if y == x => {
            let mut parts = Vec::new();
            for (t, r) in bs {
                log.push(format!("{x} := {t}"));
                parts.push(play_matrix(rest, &matrix.subst(x, t)?, r, &inner.substitute(x, t)?, log)?);
            }
            Ok(M::conj(parts))
        }
        (Quant::Exists, Skeleton::Pass(y, inner), Skeleton::Choice(bs)) if y == x => {
            let mut parts = Vec::new();
            for (t, p) in bs {
                log.push(format!("{x} := {t}"));
                parts.push(play_matrix(rest, &matrix.subst(x, t)?, &inner.substitute(x, t)?, p, log)?);
            }
            Ok(M::disj(parts))
        }
        _ => Err(mismatch(&format!("at {x}"))),
    }
}

/// The Lagrangian value `L(ρ, π)`: `1` iff the play is true.
pub fn l_fk(rho: &Skeleton, phi: &Prenex, pi: &Skeleton) -> Result<Outcome, QlraError> {
    let p = play(rho, phi, pi)?;
    p.outcome().ok_or_else(|| QlraError::NotASentence(p.formula.vars().into_iter().collect()))
}

/// Fresh names for branch copies of universally bound variables.
struct Namer {
    reserved: BTreeSet<String>,
    used: BTreeSet<String>,
    hidden: usize,
}

impl Namer {
    fn new(phi: &Prenex) -> Self {
        let mut reserved = phi.matrix.vars();
        reserved.extend(phi.bound_vars());
        Namer { reserved, used: BTreeSet::new(), hidden: 0 }
    }

    /// `x` itself the first time outside any split, else `x1`, `x2`, ...
    fn forall(&mut self, x: &str, split: bool) -> String {
        if !split && !self.used.contains(x) {
            self.used.insert(x.to_string());
            return x.to_string();
        }
        let mut k = 1;
        loop {
            let cand = format!("{x}{k}");
            if !self.used.contains(&cand) && !self.reserved.contains(&cand) {
                self.used.insert(cand.clone());
                return cand;
            }
            k += 1;
        }
    }

    /// Internal names for existential copies, never shown in a projection.
    fn exists(&mut self, x: &str) -> String {
        loop {
            self.hidden += 1;
            let cand = format!("{x}!{}", self.hidden);
            if !self.reserved.contains(&cand) && !self.used.contains(&cand) {
                return cand;
            }
        }
    }
}

/// `φ|π⟩` for a SAT skeleton: a universal formula, valid iff `π` wins.
///
/// For `side = Unsat` this is the projection of `¬φ` along `ρ`, which is valid
/// iff `ρ` refutes `φ`. Variables under a split are renamed apart, so the
/// prefix is flat.
pub fn project(phi: &Prenex, sk: &Skeleton, side: SkSide) -> Result<Prenex, QlraError> {
    let phi = oriented(phi, side);
    if !check_skeleton(&phi, sk, SkSide::Sat) {
        return Err(QlraError::ShapeMismatch(format!("{} does not fit {phi}", sk.render(side))));
    }
    let mut namer = Namer::new(&phi);
    let mut vars = Vec::new();
    let matrix = project_rec(&phi.prefix, &phi.matrix, sk, false, &mut namer, &mut vars)?;
    Ok(Prenex::new(vars.into_iter().map(|v| (Quant::Forall, v)).collect(), matrix))
}

fn oriented(phi: &Prenex, side: SkSide) -> Prenex {
    match side {
        SkSide::Sat => phi.clone(),
        SkSide::Unsat => phi.negate(),
    }
}

fn project_rec(
    prefix: &[(Quant, String)],
    matrix: &Formula,
    sk: &Skeleton,
    split: bool,
    namer: &mut Namer,
    vars: &mut Vec<String>,
) -> Result<Formula, QlraError> {
    let Some(((_, x), rest)) = prefix.split_first() else {
        return Ok(matrix.clone());
    };
    match sk {
        Skeleton::Pass(_, inner) => {
            let v = namer.forall(x, split);
            vars.push(v.clone());
            project_rec(rest, &matrix.rename(x, &v), &inner.rename(x, &v), split, namer, vars)
        }
        Skeleton::Choice(bs) => {
            let split = split || bs.len() > 1;
            let mut parts = Vec::new();
            for (t, s) in bs {
                parts.push(project_rec(rest, &matrix.substitute(x, t)?, s, split, namer, vars)?);
            }
            Ok(Formula::or(parts))
        }
        Skeleton::Leaf => unreachable!("typing checked"),
    }
}

/// A literal of `a` (the atom or one disjunct of its negation) that holds under `m`.
fn true_literal(a: &Atom, m: &Assignment) -> Result<Atom, QlraError> {
    if a.holds(m)? {
        return Ok(a.clone());
    }
    for b in a.negate().atoms() {
        if b.holds(m)? {
            return Ok(b);
        }
    }
    unreachable!("an atom or its negation holds")
}

fn substitute_literals(lits: Vec<Atom>, x: &str, t: &LinTerm) -> Result<Vec<Atom>, QlraError> {
    let mut out = BTreeSet::new();
    for a in lits {
        match a.substitute(x, t)? {
            Formula::True => {}
            Formula::Atom(b) => {
                out.insert(b);
            }
            other => unreachable!("substituting into an atom gives {other}"),
        }
    }
    Ok(out.into_iter().collect())
}

/// Turn a counter-model of `project(phi, pi, Sat)` into an UNSAT skeleton that beats `pi`.
///
/// Each universal variable gets one term, chosen by model-based projection over
/// the literals of everything below it; existential copies are eliminated by
/// the SAT terms that bind them.
pub fn extract_counter_skeleton(phi: &Prenex, pi: &Skeleton, cm: &Assignment) -> Result<Skeleton, QlraError> {
    let proj = project(phi, pi, SkSide::Sat)?;
    match proj.matrix.eval(cm) {
        Ok(false) => {}
        Ok(true) => return Err(QlraError::NotACounterModel("the projection holds".into())),
        Err(e) => return Err(QlraError::NotACounterModel(e.to_string())),
    }
    let mut namer = Namer::new(phi);
    let mut m = cm.clone();
    let (rho, _) = extract_rec(&phi.prefix, &phi.matrix, pi, false, &mut namer, &mut m)?;
    Ok(rho)
}

fn extract_rec(
    prefix: &[(Quant, String)],
    matrix: &Formula,
    sk: &Skeleton,
    split: bool,
    namer: &mut Namer,
    m: &mut Assignment,
) -> Result<(Skeleton, Vec<Atom>), QlraError> {
    let Some(((_, x), rest)) = prefix.split_first() else {
        let lits = matrix.atoms().iter().map(|a| true_literal(a, m)).collect::<Result<BTreeSet<_>, _>>()?;
        return Ok((Skeleton::Leaf, lits.into_iter().collect()));
    };
    match sk {
        Skeleton::Pass(_, inner) => {
            let v = namer.forall(x, split);
            let (below, lits) = extract_rec(rest, &matrix.rename(x, &v), &inner.rename(x, &v), split, namer, m)?;
            let u = mbp_term(&v, m, &lits)?;
            let lits = substitute_literals(lits, &v, &u)?;
            let below = below.substitute(&v, &u)?;
            Ok((Skeleton::Choice(vec![(u, below)]), lits))
        }
        Skeleton::Choice(bs) => {
            let split = split || bs.len() > 1;
            let mut acc: Option<Skeleton> = None;
            let mut lits = Vec::new();
            for (t, s) in bs {
                let e = namer.exists(x);
                let val = t.eval(m)?;
                m.insert(e.clone(), val);
                let (below, ls) = extract_rec(rest, &matrix.rename(x, &e), s, split, namer, m)?;
                lits.extend(substitute_literals(ls, &e, t)?);
                let below = below.rename(&e, x);
                acc = Some(match acc {
                    None => below,
                    Some(a) => skeleton_join(&a, &below)?,
                });
            }
            let lits: BTreeSet<Atom> = lits.into_iter().collect();
            Ok((Skeleton::pass(x, acc.expect("typed choices are nonempty")), lits.into_iter().collect()))
        }
        Skeleton::Leaf => unreachable!("typing checked"),
    }
}

/// The smallest skeleton of `side`: every choice is the constant 0.
pub fn zero_skeleton(phi: &Prenex, side: SkSide) -> Skeleton {
    phi.prefix.iter().rev().fold(Skeleton::Leaf, |s, (qn, x)| {
        if *qn == side.chooser() {
            Skeleton::Choice(vec![(LinTerm::zero(), s)])
        } else {
            Skeleton::pass(x, s)
        }
    })
}

/// A winning skeleton of `side` is certified by the validity of its projection.
pub fn certify(phi: &Prenex, sk: &Skeleton, side: SkSide) -> Result<bool, QlraError> {
    if !check_skeleton(&oriented(phi, side), sk, SkSide::Sat) {
        return Ok(false);
    }
    Ok(forall_validity(&project(phi, sk, side)?).is_valid())
}

#[derive(Clone, Debug)]
pub struct FkConfig {
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for FkConfig {
    fn default() -> Self {
        FkConfig { max_iterations: 100, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FkVerdict {
    Valid(SatSkeleton),
    Invalid(UnsatSkeleton),
    Budget,
}

/// `X` = UNSAT skeletons, `Y` = SAT skeletons, both accumulated by join.
pub struct FkLagrangian {
    phi: Prenex,
    neg: Prenex,
}

impl FkLagrangian {
    pub fn new(phi: &Prenex) -> Result<Self, QlraError> {
        let fv = phi.free_vars();
        if !fv.is_empty() {
            return Err(QlraError::NotASentence(fv.into_iter().collect()));
        }
        Ok(FkLagrangian { phi: phi.clone(), neg: phi.negate() })
    }

    /// Dual check on `psi` for a SAT skeleton; a counter is the opponent's skeleton.
    fn check(psi: &Prenex, sk: &Skeleton) -> Check<Skeleton> {
        let proj = match project(psi, sk, SkSide::Sat) {
            Ok(p) => p,
            Err(e) => return Check::Stuck(e.to_string()),
        };
        match forall_validity(&proj) {
            Validity::Valid => Check::Pass,
            Validity::CounterModel(cm) => match extract_counter_skeleton(psi, sk, &cm) {
                Ok(c) => Check::Counter(c),
                Err(e) => Check::Stuck(e.to_string()),
            },
        }
    }
}

impl Lagrangian for FkLagrangian {
    type X = Skeleton;
    type Y = Skeleton;

    fn evaluate(&self, x: &Skeleton, y: &Skeleton) -> Outcome {
        l_fk(x, &self.phi, y).expect("engine skeletons are well typed")
    }

    fn range(&self) -> Vec<i32> {
        vec![-1, 1]
    }

    fn initial_x(&self) -> Skeleton {
        zero_skeleton(&self.phi, SkSide::Unsat)
    }

    fn initial_y(&self) -> Skeleton {
        zero_skeleton(&self.phi, SkSide::Sat)
    }

    fn dual_check(&self, beta: &Skeleton, _ctx: &mut CheckCtx<'_>) -> Check<Skeleton> {
        Self::check(&self.phi, beta)
    }

    fn primal_check(&self, alpha: &Skeleton, _ctx: &mut CheckCtx<'_>) -> Check<Skeleton> {
        Self::check(&self.neg, alpha)
    }

    fn join_x(&self, a: &Skeleton, b: &Skeleton) -> Option<Skeleton> {
        skeleton_join(a, b).ok()
    }

    fn join_y(&self, a: &Skeleton, b: &Skeleton) -> Option<Skeleton> {
        skeleton_join(a, b).ok()
    }

    fn has_join_x(&self) -> bool {
        true
    }

    fn has_join_y(&self) -> bool {
        true
    }

    fn render_x(&self, x: &Skeleton) -> Value {
        Value::String(x.render(SkSide::Unsat))
    }

    fn render_y(&self, y: &Skeleton) -> Value {
        Value::String(y.render(SkSide::Sat))
    }
}

/// Decide a closed prenex sentence by alternating skeleton refinement.
pub fn run_fk(phi: &Prenex, cfg: &FkConfig) -> Result<Report<FkVerdict>, QlraError> {
    let l = FkLagrangian::new(phi)?;
    if cfg.max_iterations == 0 {
        return Ok(Report { verdict: FkVerdict::Budget, trace: json!([]), iterations: 0 });
    }
    let ecfg = EngineConfig {
        accumulate_x: true,
        accumulate_y: true,
        max_iterations: cfg.max_iterations,
        start_side: Side::Dual,
        random_seed: cfg.seed,
        ..Default::default()
    };
    match run_primal_dual(&l, &ecfg) {
        Ok(run) => {
            let verdict = match run.verdict {
                Verdict::DualWitness(pi) => FkVerdict::Valid(pi),
                Verdict::PrimalWitness(rho) => FkVerdict::Invalid(rho),
                Verdict::Budget => FkVerdict::Budget,
            };
            Ok(Report { verdict, trace: trace_to_json(&l, &run.trace), iterations: run.trace.len() })
        }
        Err(EngineError::Oracle { reason, .. }) => Err(QlraError::ShapeMismatch(reason)),
        Err(EngineError::Config(m)) => unreachable!("engine configuration is fixed here: {m}"),
    }
}

pub fn describe(v: &FkVerdict) -> String {
    match v {
        FkVerdict::Valid(pi) => format!("valid, SAT skeleton {}", pi.render(SkSide::Sat)),
        FkVerdict::Invalid(rho) => format!("invalid, UNSAT skeleton {}", rho.render(SkSide::Unsat)),
        FkVerdict::Budget => "budget exhausted".into(),
    }
}

/// A random closed sentence over `a b c d`: up to `max_vars` quantifiers and a
/// CNF matrix of small-coefficient atoms.
pub fn random_sentence<R: Rng>(rng: &mut R, max_vars: usize) -> Prenex {
    let names = ["a", "b", "c", "d"];
    let n = rng.gen_range(1..=max_vars.clamp(1, names.len()));
    let prefix: Vec<(Quant, String)> = (0..n)
        .map(|i| (if rng.gen_bool(0.5) { Quant::Forall } else { Quant::Exists }, names[i].to_string()))
        .collect();
    let atom = |rng: &mut R| {
        let mut t = LinTerm::int(rng.gen_range(-2..=2));
        for v in &names[..n] {
            t = t.add(&LinTerm::var(v).scale(&q(rng.gen_range(-2..=2))));
        }
        let rel = [Rel::Lt, Rel::Le, Rel::Le, Rel::Eq][rng.gen_range(0..4)];
        Atom::from_term(t, rel)
    };
    let clauses = (0..rng.gen_range(1..=3))
        .map(|_| Formula::or((0..rng.gen_range(1..=2)).map(|_| atom(rng)).collect()))
        .collect();
    Prenex::new(prefix, Formula::and(clauses))
}

/// A random well-typed skeleton of `side` with up to `width` branches per choice.
pub fn random_skeleton<R: Rng>(rng: &mut R, phi: &Prenex, side: SkSide, width: usize) -> Skeleton {
    random_rec(rng, &phi.prefix, side, width, &mut phi.free_vars().into_iter().collect())
}

fn random_rec<R: Rng>(
    rng: &mut R,
    prefix: &[(Quant, String)],
    side: SkSide,
    width: usize,
    scope: &mut Vec<String>,
) -> Skeleton {
    let Some(((qn, x), rest)) = prefix.split_first() else {
        return Skeleton::Leaf;
    };
    if *qn == side.chooser() {
        let k = rng.gen_range(1..=width.max(1));
        let mut bs = Vec::new();
        for _ in 0..k {
            let mut t = LinTerm::int(rng.gen_range(-2..=2));
            for v in scope.iter() {
                t = t.add(&LinTerm::var(v).scale(&q(rng.gen_range(-1..=1))));
            }
            if bs.iter().any(|(u, _)| *u == t) {
                continue;
            }
            let s = random_rec(rng, rest, side, width, scope);
            bs.push((t, s));
        }
        Skeleton::choice(bs).expect("branches share a shape")
    } else {
        scope.push(x.clone());
        let s = random_rec(rng, rest, side, width, scope);
        scope.pop();
        Skeleton::pass(x, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lra::{parse_prenex, parse_term};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const THETA: &str = "(and (or (< y 1) (< (* 2 w) y)) (or (< z y) (< x z)))";

    fn phi() -> Prenex {
        parse_prenex(&format!("(exists (w) (forall (x) (exists (y) (forall (z) {THETA}))))")).unwrap()
    }

    fn t(s: &str) -> LinTerm {
        parse_term(s).unwrap()
    }

    fn pi() -> Skeleton {
        let z = || Skeleton::pass("z", Skeleton::Leaf);
        let inner = Skeleton::choice(vec![(t("x"), z()), (t("(* 2 x)"), z())]).unwrap();
        Skeleton::choice(vec![(t("0"), Skeleton::pass("x", inner))]).unwrap()
    }

    fn pi_prime() -> Skeleton {
        parse_skeleton("(choose (-2 (forall x (choose ((+ x 1) (forall z *))))))").unwrap()
    }

    fn rho() -> Skeleton {
        let inner = Skeleton::choice(vec![(t("y"), Skeleton::Leaf), (t("(/ (+ w y) 2)"), Skeleton::Leaf)]).unwrap();
        Skeleton::pass("w", Skeleton::choice(vec![(t("-1"), Skeleton::pass("y", inner))]).unwrap())
    }

    #[test]
    fn typing_of_worked_skeletons() {
        assert!(check_skeleton(&phi(), &pi(), SkSide::Sat));
        assert!(check_skeleton(&phi(), &pi_prime(), SkSide::Sat));
        assert!(check_skeleton(&phi(), &rho(), SkSide::Unsat));
        assert!(!check_skeleton(&phi(), &Skeleton::Leaf, SkSide::Sat));
        assert!(!check_skeleton(&phi(), &pi(), SkSide::Unsat));
        // A SAT term may not mention an existential variable.
        let bad = parse_skeleton("(choose (0 (forall x (choose (w (forall z *))))))").unwrap();
        assert!(!check_skeleton(&phi(), &bad, SkSide::Sat));
    }

    #[test]
    fn join_merges_shared_terms() {
        let a = parse_skeleton("(choose (x (forall z *)))").unwrap();
        let b = parse_skeleton("(choose ((* 2 x) (forall z *)))").unwrap();
        let j = skeleton_join(&a, &b).unwrap();
        assert_eq!(j, parse_skeleton("(choose (x (forall z *)) ((* 2 x) (forall z *)))").unwrap());
        assert!(skeleton_leq(&a, &j) && skeleton_leq(&b, &j));
        assert_eq!(skeleton_join(&pi(), &pi()).unwrap(), pi());
        let c = parse_skeleton("(choose (0 (choose (1 *))))").unwrap();
        let d = parse_skeleton("(choose (0 (choose (2 *))))").unwrap();
        assert_eq!(skeleton_join(&c, &d).unwrap(), parse_skeleton("(choose (0 (choose (1 *) (2 *))))").unwrap());
        assert!(matches!(skeleton_join(&a, &Skeleton::Leaf), Err(QlraError::IncompatibleShape(_))));
    }

    #[test]
    fn worked_play_is_false() {
        let p = play(&rho(), &phi(), &pi()).unwrap();
        assert_eq!(p.value(), Some(false));
        assert_eq!(l_fk(&rho(), &phi(), &pi()).unwrap(), Outcome::NEG);
        let qf = Prenex::qf(parse_prenex("(< x 1)").unwrap().matrix);
        assert_eq!(play(&Skeleton::Leaf, &qf, &Skeleton::Leaf).unwrap().formula, qf.matrix);
    }

    #[test]
    fn projections_of_worked_skeletons() {
        let th = |w: &str, x: &str, y: &str, z: &str| {
            format!("(and (or (< {y} 1) (< (* 2 {w}) {y})) (or (< {z} {y}) (< {x} {z})))")
        };
        let p = project(&phi(), &pi(), SkSide::Sat).unwrap();
        let want = parse_prenex(&format!(
            "(forall (x z1 z2) (or {} {}))",
            th("0", "x", "x", "z1"),
            th("0", "x", "(* 2 x)", "z2")
        ))
        .unwrap();
        assert_eq!(p, want);
        assert!(!forall_validity(&p).is_valid());

        let p2 = project(&phi(), &pi_prime(), SkSide::Sat).unwrap();
        let want2 = parse_prenex(&format!("(forall (x z) {})", th("-2", "x", "(+ x 1)", "z"))).unwrap();
        assert_eq!(p2, want2);
        assert!(forall_validity(&p2).is_valid());
    }

    #[test]
    fn counter_model_gives_losing_play() {
        let cm: Assignment = [("x", -1), ("z1", -1), ("z2", -2)].iter().map(|(k, v)| (k.to_string(), q(*v))).collect();
        let rho = extract_counter_skeleton(&phi(), &pi(), &cm).unwrap();
        assert!(check_skeleton(&phi(), &rho, SkSide::Unsat));
        assert_eq!(l_fk(&rho, &phi(), &pi()).unwrap(), Outcome::NEG);
        // z₁ is touched by its bound x (then 2w - 1), z₂ by its bound y.
        let want = "(exists w (choose ((+ (* 2 w) -1) (exists y (choose ((+ (* 2 w) -1) *) (y *))))))";
        assert_eq!(rho, parse_skeleton(want).unwrap());

        let single = parse_prenex("(forall (x) (< x 0))").unwrap();
        let pi = Skeleton::pass("x", Skeleton::Leaf);
        let cm: Assignment = [("x".to_string(), q(0))].into();
        let r = extract_counter_skeleton(&single, &pi, &cm).unwrap();
        assert_eq!(r, Skeleton::Choice(vec![(LinTerm::int(0), Skeleton::Leaf)]));

        let ok: Assignment = [("x".to_string(), q(-1))].into();
        assert!(matches!(extract_counter_skeleton(&single, &pi, &ok), Err(QlraError::NotACounterModel(_))));
    }

    #[test]
    fn solver_decides_worked_sentence() {
        let r = run_fk(&phi(), &FkConfig::default()).unwrap();
        let FkVerdict::Valid(pi) = &r.verdict else { panic!("{:?}", r.verdict) };
        assert!(certify(&phi(), pi, SkSide::Sat).unwrap());

        let r = run_fk(&phi().negate(), &FkConfig::default()).unwrap();
        let FkVerdict::Invalid(rho) = &r.verdict else { panic!("{:?}", r.verdict) };
        assert!(certify(&phi().negate(), rho, SkSide::Unsat).unwrap());

        let trivial = parse_prenex("(forall (x) (<= x x))").unwrap();
        let r = run_fk(&trivial, &FkConfig::default()).unwrap();
        assert_eq!(r.verdict, FkVerdict::Valid(Skeleton::pass("x", Skeleton::Leaf)));
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn render_round_trips() {
        for (sk, side) in [(pi(), SkSide::Sat), (rho(), SkSide::Unsat)] {
            assert_eq!(parse_skeleton(&sk.render(side)).unwrap(), sk);
        }
        assert_eq!(pi().pretty(SkSide::Sat), "0.∀x.((x.∀z.•) ⊔ ([(* 2 x)].∀z.•))");
    }

    #[test]
    fn fuzzed_extraction_always_loses() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut invalid = 0;
        for _ in 0..200 {
            let phi = random_sentence(&mut rng, 3);
            let pi = random_skeleton(&mut rng, &phi, SkSide::Sat, 2);
            let proj = project(&phi, &pi, SkSide::Sat).unwrap();
            match forall_validity(&proj) {
                Validity::CounterModel(cm) => {
                    invalid += 1;
                    let rho = extract_counter_skeleton(&phi, &pi, &cm).unwrap();
                    assert!(check_skeleton(&phi, &rho, SkSide::Unsat), "{phi} {rho}");
                    assert_eq!(l_fk(&rho, &phi, &pi).unwrap(), Outcome::NEG, "{phi} {pi} {rho}");
                }
                Validity::Valid => {
                    for _ in 0..5 {
                        let rho = random_skeleton(&mut rng, &phi, SkSide::Unsat, 2);
                        assert_eq!(l_fk(&rho, &phi, &pi).unwrap(), Outcome::POS);
                    }
                }
            }
        }
        assert!(invalid > 20);
    }

    #[test]
    fn fuzzed_sentences_are_decided() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let phi = random_sentence(&mut rng, 4);
            let r = run_fk(&phi, &FkConfig { max_iterations: 60, seed: 0 }).unwrap();
            match &r.verdict {
                FkVerdict::Valid(pi) => assert!(certify(&phi, pi, SkSide::Sat).unwrap()),
                FkVerdict::Invalid(rho) => assert!(certify(&phi, rho, SkSide::Unsat).unwrap()),
                FkVerdict::Budget => panic!("budget on {phi}"),
            }
        }
    }

    #[test]
    fn winning_skeleton_beats_sampled_opponents() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let rho = random_skeleton(&mut rng, &phi(), SkSide::Unsat, 3);
            assert_eq!(l_fk(&rho, &phi(), &pi_prime()).unwrap(), Outcome::POS);
        }
    }

    #[test]
    fn larger_skeletons_play_better() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..150 {
            let phi = random_sentence(&mut rng, 3);
            let a = random_skeleton(&mut rng, &phi, SkSide::Sat, 2);
            let b = skeleton_join(&a, &random_skeleton(&mut rng, &phi, SkSide::Sat, 2)).unwrap();
            let r = random_skeleton(&mut rng, &phi, SkSide::Unsat, 2);
            let s = skeleton_join(&r, &random_skeleton(&mut rng, &phi, SkSide::Unsat, 2)).unwrap();
            assert!(skeleton_leq(&a, &b) && skeleton_leq(&r, &s));
            assert!(l_fk(&r, &phi, &a).unwrap() <= l_fk(&r, &phi, &b).unwrap());
            assert!(l_fk(&s, &phi, &a).unwrap() <= l_fk(&r, &phi, &a).unwrap());
        }
    }
}
