//! Validity of fixpoint-logic formulas over integer linear arithmetic.
//!
//! A problem is a query plus an ordered list of `μ`/`ν` predicate definitions;
//! earlier definitions have higher priority. The search picks quantifier
//! instantiations with strategy skeletons (as in [`crate::qlra`]) and cuts
//! recursion with ranking-function sets, one per predicate.
//!
//! The quantifier-free approximation built from a pair of candidates is
//! neither an over- nor an under-approximation of the input; only the outcome
//! of the cut-off evaluation is meaningful.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cegar::Report;
use crate::lagrangian::{
    run_primal_dual, trace_to_json, Check, CheckCtx, EngineConfig, EngineError, Lagrangian, Outcome, Verdict,
};
use crate::lra::{binder_vars, formula_of, q, term_of, Assignment, Formula, LinTerm, LraError, Quant, Rational};
use crate::qlra::{play_matrix, skeleton_join, skeleton_of, PlayMatrix, QlraError, SkSide, Skeleton};
use crate::sexp::{parse_all, ParseError, Sexp};
use crate::termination::{dwf_decreases, template_pool, RankingTemplate};
use crate::ts::State;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("ill-formed problem: {0}")]
    IllFormed(String),
    #[error(transparent)]
    Skeleton(#[from] QlraError),
    #[error(transparent)]
    Lra(#[from] LraError),
    #[error("evaluation exceeded {0} calls")]
    StepCap(usize),
    #[error("the answer depends on arguments outside [-{0}, {0}]")]
    DomainEscape(i64),
    #[error("bounded semantics says {oracle}, the solver disagrees")]
    OracleDisagrees { oracle: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Mu,
    Nu,
}

/// A formula in negation normal form; negation only occurs inside arithmetic literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fx {
    Lit(Formula),
    Call(usize, String, Vec<LinTerm>),
    And(Vec<Fx>),
    Or(Vec<Fx>),
    Forall(String, Box<Fx>),
    Exists(String, Box<Fx>),
}

impl Fx {
    pub fn and(items: Vec<Fx>) -> Fx {
        let mut out = Vec::new();
        for f in items {
            match f {
                Fx::Lit(Formula::True) => {}
                Fx::Lit(Formula::False) => return Fx::Lit(Formula::False),
                Fx::And(v) => out.extend(v),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Fx::Lit(Formula::True),
            1 => out.pop().unwrap(),
            _ => Fx::And(out),
        }
    }

    pub fn or(items: Vec<Fx>) -> Fx {
        let mut out = Vec::new();
        for f in items {
            match f {
                Fx::Lit(Formula::False) => {}
                Fx::Lit(Formula::True) => return Fx::Lit(Formula::True),
                Fx::Or(v) => out.extend(v),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Fx::Lit(Formula::False),
            1 => out.pop().unwrap(),
            _ => Fx::Or(out),
        }
    }

    pub fn substitute(&self, x: &str, t: &LinTerm) -> Result<Fx, LraError> {
        Ok(match self {
            Fx::Lit(f) => Fx::Lit(f.substitute(x, t)?),
            Fx::Call(i, n, args) => {
                Fx::Call(*i, n.clone(), args.iter().map(|a| a.substitute(x, t)).collect::<Result<_, _>>()?)
            }
            Fx::And(v) => Fx::and(v.iter().map(|f| f.substitute(x, t)).collect::<Result<_, _>>()?),
            Fx::Or(v) => Fx::or(v.iter().map(|f| f.substitute(x, t)).collect::<Result<_, _>>()?),
            Fx::Forall(y, _) | Fx::Exists(y, _) if y == x => self.clone(),
            Fx::Forall(y, b) => Fx::Forall(y.clone(), Box::new(b.substitute(x, t)?)),
            Fx::Exists(y, b) => Fx::Exists(y.clone(), Box::new(b.substitute(x, t)?)),
        })
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Fx::Lit(f) => f.vars(),
            Fx::Call(_, _, args) => args.iter().flat_map(|a| a.vars()).collect(),
            Fx::And(v) | Fx::Or(v) => v.iter().flat_map(|f| f.free_vars()).collect(),
            Fx::Forall(y, b) | Fx::Exists(y, b) => {
                let mut s = b.free_vars();
                s.remove(y);
                s
            }
        }
    }

    fn is_quantifier_free(&self) -> bool {
        match self {
            Fx::Lit(_) | Fx::Call(..) => true,
            Fx::And(v) | Fx::Or(v) => v.iter().all(Fx::is_quantifier_free),
            Fx::Forall(..) | Fx::Exists(..) => false,
        }
    }

    fn calls(&self, out: &mut Vec<(usize, usize)>) {
        match self {
            Fx::Lit(_) => {}
            Fx::Call(i, _, args) => out.push((*i, args.len())),
            Fx::And(v) | Fx::Or(v) => v.iter().for_each(|f| f.calls(out)),
            Fx::Forall(_, b) | Fx::Exists(_, b) => b.calls(out),
        }
    }
}

impl PlayMatrix for Fx {
    fn subst(&self, x: &str, t: &LinTerm) -> Result<Self, LraError> {
        self.substitute(x, t)
    }
    fn conj(parts: Vec<Self>) -> Self {
        Fx::and(parts)
    }
    fn disj(parts: Vec<Self>) -> Self {
        Fx::or(parts)
    }
}

impl fmt::Display for Fx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, v: &[Fx]| {
            write!(f, "({head}")?;
            for g in v {
                write!(f, " {g}")?;
            }
            write!(f, ")")
        };
        match self {
            Fx::Lit(g) => write!(f, "{g}"),
            Fx::Call(_, n, args) => {
                write!(f, "({n}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Fx::And(v) => list(f, "and", v),
            Fx::Or(v) => list(f, "or", v),
            Fx::Forall(y, b) => write!(f, "(forall ({y}) {b})"),
            Fx::Exists(y, b) => write!(f, "(exists ({y}) {b})"),
        }
    }
}

/// A prenex formula with a quantifier-free body that may contain calls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixPrenex {
    pub prefix: Vec<(Quant, String)>,
    pub matrix: Fx,
}

impl FixPrenex {
    /// Hoist every quantifier to the front, renaming bound variables apart
    /// from each other and from `free`.
    pub fn from_fx(f: &Fx, free: &[String]) -> FixPrenex {
        let mut used: BTreeSet<String> = free.iter().cloned().collect();
        let mut prefix = Vec::new();
        let matrix = hoist(f, &mut used, &mut prefix);
        FixPrenex { prefix, matrix }
    }

    pub fn to_fx(&self) -> Fx {
        self.prefix.iter().rev().fold(self.matrix.clone(), |b, (qn, x)| match qn {
            Quant::Forall => Fx::Forall(x.clone(), Box::new(b)),
            Quant::Exists => Fx::Exists(x.clone(), Box::new(b)),
        })
    }
}

fn hoist(f: &Fx, used: &mut BTreeSet<String>, prefix: &mut Vec<(Quant, String)>) -> Fx {
    match f {
        Fx::Forall(x, b) | Fx::Exists(x, b) => {
            let qn = if matches!(f, Fx::Forall(..)) { Quant::Forall } else { Quant::Exists };
            let mut name = x.clone();
            let mut k = 1;
            while used.contains(&name) {
                name = format!("{x}{k}");
                k += 1;
            }
            used.insert(name.clone());
            prefix.push((qn, name.clone()));
            let body = b.substitute(x, &LinTerm::var(&name)).expect("renaming keeps sorts");
            hoist(&body, used, prefix)
        }
        Fx::And(v) => Fx::and(v.iter().map(|g| hoist(g, used, prefix)).collect()),
        Fx::Or(v) => Fx::or(v.iter().map(|g| hoist(g, used, prefix)).collect()),
        other => other.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Def {
    pub name: String,
    pub params: Vec<String>,
    pub mode: Mode,
    pub body: FixPrenex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixProblem {
    pub defs: Vec<Def>,
    pub query: FixPrenex,
}

impl FixProblem {
    /// Check arities, scoping and closedness.
    pub fn validate(&self) -> Result<(), FixError> {
        let bad = |m: String| Err(FixError::IllFormed(m));
        let check_calls = |f: &Fx, where_: &str| -> Result<(), FixError> {
            let mut cs = Vec::new();
            f.calls(&mut cs);
            for (i, n) in cs {
                match self.defs.get(i) {
                    Some(d) if d.params.len() == n => {}
                    Some(d) => return bad(format!("{where_}: {} takes {} arguments", d.name, d.params.len())),
                    None => return bad(format!("{where_}: unknown predicate #{i}")),
                }
            }
            Ok(())
        };
        let fv = self.query.to_fx().free_vars();
        if !fv.is_empty() {
            return bad(format!("query has free variables {fv:?}"));
        }
        if !self.query.matrix.is_quantifier_free() {
            return bad("query is not prenex".into());
        }
        check_calls(&self.query.matrix, "query")?;
        for d in &self.defs {
            let params: BTreeSet<String> = d.params.iter().cloned().collect();
            if params.len() != d.params.len() {
                return bad(format!("{}: repeated parameter", d.name));
            }
            let fv = d.body.to_fx().free_vars();
            if !fv.is_subset(&params) {
                return bad(format!("{}: free variables {:?} are not parameters", d.name, fv.difference(&params)));
            }
            if !d.body.matrix.is_quantifier_free() {
                return bad(format!("{}: body is not prenex", d.name));
            }
            check_calls(&d.body.matrix, &d.name)?;
        }
        Ok(())
    }

    pub fn mode(&self, i: usize) -> Mode {
        self.defs[i].mode
    }

    /// Indices of `μ` (proponent-ranked) or `ν` (opponent-ranked) definitions.
    pub fn indices(&self, mode: Mode) -> Vec<usize> {
        (0..self.defs.len()).filter(|i| self.defs[*i].mode == mode).collect()
    }
}

impl fmt::Display for FixProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.defs {
            let m = if d.mode == Mode::Mu { ":mu" } else { ":nu" };
            writeln!(f, "(define ({} {}) {m} {})", d.name, d.params.join(" "), d.body.to_fx())?;
        }
        write!(f, "(query {})", self.query.to_fx())
    }
}

/// Read `(define (P x ...) :mu body)` forms followed by one `(query body)`.
pub fn parse_fix_problem(src: &str) -> Result<FixProblem, FixError> {
    let forms = parse_all(src)?;
    let mut heads: Vec<(String, Vec<String>, Mode, &Sexp)> = Vec::new();
    let mut query: Option<&Sexp> = None;
    for e in &forms {
        let items = e.expect_list("top-level form")?;
        match e.head() {
            Some("define") => {
                if items.len() != 4 {
                    return Err(ParseError::new(e.pos(), "define takes (P args) :mu|:nu body").into());
                }
                let sig = items[1].expect_list("signature")?;
                let name = sig.first().ok_or_else(|| ParseError::new(items[1].pos(), "empty signature"))?;
                let name = name.expect_atom("predicate name")?.to_string();
                let params = binder_vars(&Sexp::List(sig[1..].to_vec(), items[1].pos()))?;
                let mode = match items[2].as_atom() {
                    Some(":mu") => Mode::Mu,
                    Some(":nu") => Mode::Nu,
                    _ => return Err(ParseError::new(items[2].pos(), "expected :mu or :nu").into()),
                };
                if heads.iter().any(|h| h.0 == name) {
                    return Err(ParseError::new(e.pos(), format!("{name} defined twice")).into());
                }
                heads.push((name, params, mode, &items[3]));
            }
            Some("query") if items.len() == 2 => {
                if query.is_some() {
                    return Err(ParseError::new(e.pos(), "more than one query").into());
                }
                query = Some(&items[1]);
            }
            _ => return Err(ParseError::new(e.pos(), "expected (define ...) or (query ...)").into()),
        }
    }
    let query = query.ok_or_else(|| FixError::IllFormed("missing (query ...)".into()))?;
    let names: BTreeMap<String, usize> = heads.iter().enumerate().map(|(i, h)| (h.0.clone(), i)).collect();
    let mut defs = Vec::new();
    for (name, params, mode, body) in &heads {
        let fx = fx_of(body, &names)?;
        defs.push(Def { name: name.clone(), params: params.clone(), mode: *mode, body: FixPrenex::from_fx(&fx, params) });
    }
    let problem = FixProblem { query: FixPrenex::from_fx(&fx_of(query, &names)?, &[]), defs };
    problem.validate()?;
    Ok(problem)
}

fn fx_of(e: &Sexp, names: &BTreeMap<String, usize>) -> Result<Fx, FixError> {
    let Some(items) = e.as_list() else {
        return Ok(Fx::Lit(formula_of(e)?));
    };
    let args = &items[1..];
    let sub = || args.iter().map(|a| fx_of(a, names)).collect::<Result<Vec<_>, _>>();
    match e.head() {
        Some("and") => Ok(Fx::and(sub()?)),
        Some("or") => Ok(Fx::or(sub()?)),
        Some(h @ ("forall" | "exists")) if args.len() == 2 => {
            let body = fx_of(&args[1], names)?;
            let vs = binder_vars(&args[0])?;
            Ok(vs.iter().rev().fold(body, |b, v| {
                if h == "forall" {
                    Fx::Forall(v.clone(), Box::new(b))
                } else {
                    Fx::Exists(v.clone(), Box::new(b))
                }
            }))
        }
        Some("=>") if args.len() == 2 => {
            let lhs = formula_of(&args[0])
                .map_err(|_| ParseError::new(args[0].pos(), "the left side of => must be arithmetic"))?;
            Ok(Fx::or(vec![Fx::Lit(lhs.negate()), fx_of(&args[1], names)?]))
        }
        Some(h) if names.contains_key(h) => {
            let ts = args.iter().map(term_of).collect::<Result<Vec<_>, _>>()?;
            Ok(Fx::Call(names[h], h.to_string(), ts))
        }
        _ => Ok(Fx::Lit(formula_of(e)?)),
    }
}

/// A fresh function symbol standing for an existential choice inside a definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemSymbol {
    pub name: String,
    pub def: usize,
    pub var: String,
    pub params: Vec<String>,
}

/// One fresh symbol `fₖ(x⃗ᵢ)` per existential variable of each definition body.
///
/// The choice of a witness may depend only on the predicate's own arguments;
/// the search realizes this by drawing existential terms in definitions from a
/// pool over the parameters alone.
pub fn skolemize_choices(defs: &[Def]) -> Vec<SkolemSymbol> {
    let mut out = Vec::new();
    for (i, d) in defs.iter().enumerate() {
        for (qn, x) in &d.body.prefix {
            if *qn == Quant::Exists {
                out.push(SkolemSymbol {
                    name: format!("f{}", out.len() + 1),
                    def: i,
                    var: x.clone(),
                    params: d.params.clone(),
                });
            }
        }
    }
    out
}

/// Replace each skolemized variable by the chosen term (over the parameters) and drop its binder.
pub fn apply_skolem(defs: &[Def], syms: &[SkolemSymbol], choice: &[LinTerm]) -> Result<Vec<Def>, FixError> {
    if syms.len() != choice.len() {
        return Err(FixError::IllFormed(format!("{} symbols, {} terms", syms.len(), choice.len())));
    }
    let mut out = defs.to_vec();
    for (s, t) in syms.iter().zip(choice) {
        let params: BTreeSet<String> = s.params.iter().cloned().collect();
        if !t.vars().is_subset(&params) {
            return Err(FixError::IllFormed(format!("{} may only depend on {:?}", s.name, s.params)));
        }
        let d = &mut out[s.def];
        d.body.prefix.retain(|(_, x)| *x != s.var);
        d.body.matrix = d.body.matrix.substitute(&s.var, t)?;
    }
    Ok(out)
}

/// The definitions with each symbol written as an application, `(P (f1 x))`.
pub fn render_skolem(defs: &[Def], syms: &[SkolemSymbol]) -> Vec<String> {
    let apps: Vec<LinTerm> = syms
        .iter()
        .map(|s| LinTerm::var(&format!("({} {})", s.name, s.params.join(" "))))
        .collect();
    defs.iter()
        .enumerate()
        .map(|(i, d)| {
            let mut body = d.body.clone();
            for (s, t) in syms.iter().zip(&apps).filter(|(s, _)| s.def == i) {
                body.prefix.retain(|(_, x)| *x != s.var);
                body.matrix = body.matrix.substitute(&s.var, t).expect("renaming keeps sorts");
            }
            let m = if d.mode == Mode::Mu { "μ" } else { "ν" };
            format!("{}({}) ={m} {}", d.name, d.params.join(", "), body.to_fx())
        })
        .collect()
}

/// Bounds on the candidate terms and ranking templates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixPools {
    pub max_coef: i64,
    pub max_offset: i64,
    /// Maximum number of variables with a nonzero coefficient in a term.
    pub term_depth: usize,
    /// Closed instantiations range over `[-D, D]`.
    pub domain_bound: i64,
}

impl Default for FixPools {
    fn default() -> Self {
        FixPools { max_coef: 1, max_offset: 1, term_depth: 1, domain_bound: 16 }
    }
}

/// `0, -1, 1, -2, 2, …` up to `±k`.
fn constants(k: i64) -> Vec<i64> {
    let mut v = vec![0];
    for c in 1..=k {
        v.push(-c);
        v.push(c);
    }
    v
}

/// Candidate instantiation terms over `scope`, simplest first.
pub fn term_pool(scope: &[String], p: &FixPools) -> Vec<LinTerm> {
    if scope.is_empty() {
        return constants(p.domain_bound).into_iter().map(LinTerm::int).collect();
    }
    let coefs: Vec<i64> = constants(p.max_coef).into_iter().filter(|c| *c != 0).collect();
    let mut out: Vec<LinTerm> = Vec::new();
    for n in 0..=p.term_depth.min(scope.len()) {
        for vars in subsets(scope, n) {
            let mut partial: Vec<LinTerm> = vec![LinTerm::zero()];
            for v in &vars {
                partial = partial
                    .iter()
                    .flat_map(|t| coefs.iter().map(move |c| t.add(&LinTerm::var(v).scale(&q(*c)))))
                    .collect();
            }
            for t in partial {
                for c in constants(p.max_offset) {
                    out.push(t.add_const(&q(c)));
                }
            }
        }
    }
    out
}

fn subsets(v: &[String], n: usize) -> Vec<Vec<String>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        for mut rest in subsets(&v[i + 1..], n - 1) {
            rest.insert(0, v[i].clone());
            out.push(rest);
        }
    }
    out
}

/// Where a skeleton component lives: the query or one definition body.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Comp {
    Query,
    Def(usize),
}

/// A candidate for one side: ranking sets per definition, a skeleton for the
/// query and one per definition body.
///
/// On the proponent side the ranking sets of `μ` definitions are used, on the
/// opponent side those of `ν` definitions; the others stay empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixChoice {
    pub ranks: Vec<BTreeSet<RankingTemplate>>,
    pub query: Skeleton,
    pub defs: Vec<Skeleton>,
}

pub type FixX = FixChoice;
pub type FixY = FixChoice;

impl FixChoice {
    pub fn join(&self, other: &FixChoice) -> Result<FixChoice, FixError> {
        Ok(FixChoice {
            ranks: self.ranks.iter().zip(&other.ranks).map(|(a, b)| a.union(b).cloned().collect()).collect(),
            query: skeleton_join(&self.query, &other.query)?,
            defs: self.defs.iter().zip(&other.defs).map(|(a, b)| skeleton_join(a, b)).collect::<Result<_, _>>()?,
        })
    }

    pub fn leq(&self, other: &FixChoice) -> bool {
        use crate::qlra::skeleton_leq;
        self.ranks.iter().zip(&other.ranks).all(|(a, b)| a.is_subset(b))
            && skeleton_leq(&self.query, &other.query)
            && self.defs.iter().zip(&other.defs).all(|(a, b)| skeleton_leq(a, b))
    }

    /// `(choice (ranks (P ((1) 0)) …) (query sk) (defs (P sk) …))`.
    pub fn render(&self, problem: &FixProblem, side: SkSide) -> String {
        let ranks: Vec<String> = self
            .ranks
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(i, r)| {
                let ts: Vec<String> = r
                    .iter()
                    .map(|t| {
                        let cs: Vec<String> = t.coeffs.iter().map(|c| c.to_string()).collect();
                        format!("(({}) {})", cs.join(" "), t.offset)
                    })
                    .collect();
                format!("({} {})", problem.defs[i].name, ts.join(" "))
            })
            .collect();
        let defs: Vec<String> = self
            .defs
            .iter()
            .enumerate()
            .map(|(i, s)| format!("({} {})", problem.defs[i].name, s.render(side)))
            .collect();
        let ranks: String = ranks.iter().map(|r| format!(" {r}")).collect();
        format!("(choice (ranks{ranks}) (query {}) (defs {}))", self.query.render(side), defs.join(" "))
    }

    /// Ranking sets in the `max(x - 2, 0)` notation.
    pub fn describe_ranks(&self, problem: &FixProblem) -> Vec<String> {
        let mut out = Vec::new();
        for (i, r) in self.ranks.iter().enumerate() {
            if !r.is_empty() {
                let d = &problem.defs[i];
                let ts: Vec<String> = r.iter().map(|t| t.render(&d.params)).collect();
                out.push(format!("{}: {{{}}}", d.name, ts.join(", ")));
            }
        }
        out
    }
}

/// Read the form written by [`FixChoice::render`].
pub fn parse_fix_choice(src: &str, problem: &FixProblem) -> Result<FixChoice, FixError> {
    let forms = parse_all(src)?;
    let [e] = forms.as_slice() else {
        return Err(FixError::IllFormed("expected one (choice ...) form".into()));
    };
    fix_choice_of(e, problem)
}

pub fn fix_choice_of(e: &Sexp, problem: &FixProblem) -> Result<FixChoice, FixError> {
    let items = e.expect_list("choice")?;
    if e.head() != Some("choice") || items.len() != 4 {
        return Err(ParseError::new(e.pos(), "expected (choice (ranks ...) (query ...) (defs ...))").into());
    }
    let index = |s: &Sexp| -> Result<usize, FixError> {
        let n = s.expect_atom("predicate")?;
        problem
            .defs
            .iter()
            .position(|d| d.name == n)
            .ok_or_else(|| ParseError::new(s.pos(), format!("unknown predicate {n}")).into())
    };
    let section = |k: usize, name: &str| -> Result<&[Sexp], FixError> {
        let s = &items[k];
        match s.as_list() {
            Some(v) if s.head() == Some(name) => Ok(&v[1..]),
            _ => Err(ParseError::new(s.pos(), format!("expected ({name} ...)")).into()),
        }
    };
    let n = problem.defs.len();
    let mut ranks = vec![BTreeSet::new(); n];
    for r in section(1, "ranks")? {
        let v = r.expect_list("ranking set")?;
        let i = index(v.first().ok_or_else(|| ParseError::new(r.pos(), "empty ranking set"))?)?;
        for t in &v[1..] {
            let pair = t.expect_list("template")?;
            let num = |s: &Sexp| -> Result<i64, FixError> {
                s.expect_atom("integer")?
                    .parse()
                    .map_err(|_| ParseError::new(s.pos(), "expected an integer").into())
            };
            if pair.len() != 2 {
                return Err(ParseError::new(t.pos(), "template is ((coefficients) offset)").into());
            }
            let cs = pair[0].expect_list("coefficients")?.iter().map(num).collect::<Result<Vec<_>, _>>()?;
            if cs.len() != problem.defs[i].params.len() {
                return Err(ParseError::new(t.pos(), "wrong number of coefficients").into());
            }
            ranks[i].insert(RankingTemplate::new(cs, num(&pair[1])?));
        }
    }
    let query_items = section(2, "query")?;
    let [qs] = query_items else {
        return Err(ParseError::new(items[2].pos(), "expected (query skeleton)").into());
    };
    let query = skeleton_of(qs)?;
    let mut defs: Vec<Option<Skeleton>> = vec![None; n];
    for d in section(3, "defs")? {
        let v = d.expect_list("definition skeleton")?;
        if v.len() != 2 {
            return Err(ParseError::new(d.pos(), "expected (P skeleton)").into());
        }
        defs[index(&v[0])?] = Some(skeleton_of(&v[1])?);
    }
    let defs = defs
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| FixError::IllFormed(format!("no skeleton for {}", problem.defs[i].name))))
        .collect::<Result<_, _>>()?;
    Ok(FixChoice { ranks, query, defs })
}

/// `φ′ = ⟨ρ|φ|π⟩` and `P′ᵢ(x⃗ᵢ) = ⟨ρᵢ|φᵢ|πᵢ⟩`; calls pass through untouched.
pub fn build_qf_approx(problem: &FixProblem, x: &FixX, y: &FixY) -> Result<(Fx, Vec<Fx>), FixError> {
    let mut log = Vec::new();
    let q = play_matrix(&problem.query.prefix, &problem.query.matrix, &x.query, &y.query, &mut log)?;
    let defs = problem
        .defs
        .iter()
        .enumerate()
        .map(|(i, d)| play_matrix(&d.body.prefix, &d.body.matrix, &x.defs[i], &y.defs[i], &mut log))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((q, defs))
}

type Visited = Vec<BTreeSet<State>>;

struct Evaluator<'a> {
    problem: &'a FixProblem,
    bodies: Vec<Fx>,
    ranks: Vec<Vec<RankingTemplate>>,
    memo: BTreeMap<(usize, State, Visited), bool>,
    steps: usize,
    cap: usize,
}

impl Evaluator<'_> {
    fn eval(&mut self, f: &Fx, vs: &Visited) -> Result<bool, FixError> {
        match f {
            Fx::Lit(g) => Ok(g.eval(&Assignment::new())?),
            Fx::Call(i, _, args) => {
                let a = args.iter().map(|t| t.eval(&Assignment::new())).collect::<Result<State, _>>()?;
                self.call(*i, a, vs)
            }
            Fx::And(v) => {
                for g in v {
                    if !self.eval(g, vs)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Fx::Or(v) => {
                for g in v {
                    if self.eval(g, vs)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Fx::Forall(..) | Fx::Exists(..) => Err(FixError::IllFormed("quantifier left in an approximation".into())),
        }
    }

    /// Unfold when every visited argument of `Pᵢ` ranks above `args`, else cut by mode.
    ///
    /// Unfolding `Pᵢ` forgets the visits of every lower-priority predicate.
    fn call(&mut self, i: usize, args: State, vs: &Visited) -> Result<bool, FixError> {
        self.steps += 1;
        if self.steps > self.cap {
            return Err(FixError::StepCap(self.cap));
        }
        if !vs[i].iter().all(|m| dwf_decreases(&self.ranks[i], m, &args)) {
            return Ok(self.problem.mode(i) == Mode::Nu);
        }
        let mut next = vs.clone();
        next[i].insert(args.clone());
        for v in next.iter_mut().skip(i + 1) {
            v.clear();
        }
        let key = (i, args, next);
        if let Some(b) = self.memo.get(&key) {
            return Ok(*b);
        }
        let mut body = self.bodies[i].clone();
        for (p, a) in self.problem.defs[i].params.iter().zip(&key.1) {
            body = body.substitute(p, &LinTerm::constant(a.clone()))?;
        }
        let b = self.eval(&body, &key.2)?;
        self.memo.insert(key, b);
        Ok(b)
    }
}

pub const DEFAULT_MAX_STEPS: usize = 200_000;

/// The Lagrangian value: evaluate the approximation from empty visited sets.
pub fn l_fix(problem: &FixProblem, x: &FixX, y: &FixY) -> Result<Outcome, FixError> {
    l_fix_capped(problem, x, y, DEFAULT_MAX_STEPS)
}

pub fn l_fix_capped(problem: &FixProblem, x: &FixX, y: &FixY, cap: usize) -> Result<Outcome, FixError> {
    let (query, bodies) = build_qf_approx(problem, x, y)?;
    let ranks = (0..problem.defs.len())
        .map(|i| {
            let src = if problem.mode(i) == Mode::Mu { &y.ranks[i] } else { &x.ranks[i] };
            src.iter().cloned().collect()
        })
        .collect();
    let mut ev = Evaluator { problem, bodies, ranks, memo: BTreeMap::new(), steps: 0, cap };
    let start = vec![BTreeSet::new(); problem.defs.len()];
    Ok(Outcome::from_bool(ev.eval(&query, &start)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Tv {
    F,
    U,
    T,
}

impl Tv {
    fn of(b: bool) -> Tv {
        if b {
            Tv::T
        } else {
            Tv::F
        }
    }
}

struct Oracle<'a> {
    problem: &'a FixProblem,
    d: i64,
    domain: Vec<Vec<State>>,
    tables: Vec<BTreeMap<State, Tv>>,
}

impl Oracle<'_> {
    fn eval(&self, f: &Fx, env: &mut Assignment) -> Result<Tv, FixError> {
        Ok(match f {
            Fx::Lit(g) => Tv::of(g.eval(env)?),
            Fx::Call(i, _, args) => {
                let a = args.iter().map(|t| t.eval(env)).collect::<Result<State, _>>()?;
                self.tables[*i].get(&a).copied().unwrap_or(Tv::U)
            }
            Fx::And(v) => {
                let mut acc = Tv::T;
                for g in v {
                    acc = acc.min(self.eval(g, env)?);
                    if acc == Tv::F {
                        break;
                    }
                }
                acc
            }
            Fx::Or(v) => {
                let mut acc = Tv::F;
                for g in v {
                    acc = acc.max(self.eval(g, env)?);
                    if acc == Tv::T {
                        break;
                    }
                }
                acc
            }
            Fx::Forall(x, b) | Fx::Exists(x, b) => {
                let univ = matches!(f, Fx::Forall(..));
                let saved = env.get(x).cloned();
                let mut acc = if univ { Tv::T } else { Tv::F };
                for c in -self.d..=self.d {
                    env.insert(x.clone(), q(c));
                    let v = self.eval(b, env)?;
                    acc = if univ { acc.min(v) } else { acc.max(v) };
                    if acc == if univ { Tv::F } else { Tv::T } {
                        break;
                    }
                }
                match saved {
                    Some(s) => env.insert(x.clone(), s),
                    None => env.remove(x),
                };
                acc
            }
        })
    }

    fn step(&self, k: usize) -> Result<BTreeMap<State, Tv>, FixError> {
        let d = &self.problem.defs[k];
        let body = d.body.to_fx();
        let mut out = BTreeMap::new();
        for args in &self.domain[k] {
            let mut env: Assignment = d.params.iter().cloned().zip(args.iter().cloned()).collect();
            out.insert(args.clone(), self.eval(&body, &mut env)?);
        }
        Ok(out)
    }

    /// Solve definitions `k..` for the current tables of `..k`, innermost last.
    fn solve(&mut self, k: usize) -> Result<(), FixError> {
        if k == self.problem.defs.len() {
            return Ok(());
        }
        let start = if self.problem.mode(k) == Mode::Mu { Tv::F } else { Tv::T };
        self.tables[k] = self.domain[k].iter().map(|a| (a.clone(), start)).collect();
        loop {
            self.solve(k + 1)?;
            let next = self.step(k)?;
            if next == self.tables[k] {
                return Ok(());
            }
            self.tables[k] = next;
        }
    }
}

/// Exact nested fixpoint over the finite structure `[-D, D]`: quantifiers range
/// over the domain and calls outside it are unknown. Test oracle only.
pub fn bounded_semantics_oracle(problem: &FixProblem, d: i64) -> Result<bool, FixError> {
    let points: Vec<Rational> = (-d..=d).map(q).collect();
    let mut domain = Vec::new();
    for def in &problem.defs {
        let size = points.len().checked_pow(def.params.len() as u32).unwrap_or(usize::MAX);
        if size > 1 << 16 {
            return Err(FixError::IllFormed(format!("{}: domain of {size} points is too large", def.name)));
        }
        let mut tuples: Vec<State> = vec![vec![]];
        for _ in &def.params {
            tuples = tuples
                .iter()
                .flat_map(|t| points.iter().map(move |p| [t.clone(), vec![p.clone()]].concat()))
                .collect();
        }
        domain.push(tuples);
    }
    let mut o = Oracle { problem, d, tables: vec![BTreeMap::new(); problem.defs.len()], domain };
    o.solve(0)?;
    match o.eval(&problem.query.to_fx(), &mut Assignment::new())? {
        Tv::T => Ok(true),
        Tv::F => Ok(false),
        Tv::U => Err(FixError::DomainEscape(d)),
    }
}

/// Per-position term pools of one skeleton component.
struct Layout {
    prefix: Vec<(Quant, String)>,
    /// `Some(pool)` where the side chooses.
    pools: Vec<Option<Vec<LinTerm>>>,
}

impl Layout {
    fn new(problem: &FixProblem, comp: Comp, side: SkSide, p: &FixPools) -> Layout {
        let (prefix, params) = match comp {
            Comp::Query => (&problem.query.prefix, Vec::new()),
            Comp::Def(i) => (&problem.defs[i].body.prefix, problem.defs[i].params.clone()),
        };
        let mut scope = params.clone();
        let mut pools = Vec::new();
        for (qn, x) in prefix {
            if *qn == side.chooser() {
                // Existential choices inside a definition see only its parameters.
                let s = if side == SkSide::Sat && comp != Comp::Query { &params } else { &scope };
                pools.push(Some(term_pool(s, p)));
            } else {
                pools.push(None);
                scope.push(x.clone());
            }
        }
        Layout { prefix: prefix.clone(), pools }
    }

    fn build(&self, k: usize, pick: &dyn Fn(usize, &[LinTerm]) -> Vec<LinTerm>) -> Skeleton {
        if k == self.prefix.len() {
            return Skeleton::Leaf;
        }
        match &self.pools[k] {
            None => Skeleton::pass(&self.prefix[k].1, self.build(k + 1, pick)),
            Some(pool) => {
                let child = self.build(k + 1, pick);
                let bs = pick(k, pool).into_iter().map(|t| (t, child.clone())).collect();
                Skeleton::choice(bs).expect("uniform branches")
            }
        }
    }

    fn top(&self) -> Skeleton {
        self.build(0, &|_, pool| pool.to_vec())
    }

    fn bottom(&self) -> Skeleton {
        self.build(0, &|_, pool| vec![pool[0].clone()])
    }

    /// Every single-branch skeleton, simplest first, at most `cap`.
    fn paths(&self, cap: usize) -> Vec<Skeleton> {
        let slots: Vec<usize> = (0..self.prefix.len()).filter(|k| self.pools[*k].is_some()).collect();
        let sizes: Vec<usize> = slots.iter().map(|k| self.pools[*k].as_ref().unwrap().len()).collect();
        let mut out = Vec::new();
        for idx in odometer(&sizes, cap) {
            let pick = |k: usize, pool: &[LinTerm]| {
                let j = slots.iter().position(|s| *s == k).unwrap();
                vec![pool[idx[j]].clone()]
            };
            out.push(self.build(0, &pick));
        }
        out
    }
}

/// Index vectors over `sizes` in order of increasing sum, at most `cap`.
fn odometer(sizes: &[usize], cap: usize) -> Vec<Vec<usize>> {
    if sizes.contains(&0) {
        return Vec::new();
    }
    let max_sum: usize = sizes.iter().map(|s| s - 1).sum();
    let mut out = Vec::new();
    for total in 0..=max_sum {
        let mut cur = vec![0; sizes.len()];
        fill(sizes, total, 0, &mut cur, &mut out, cap);
        if out.len() >= cap {
            break;
        }
    }
    out.truncate(cap);
    out
}

fn fill(sizes: &[usize], left: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
    if out.len() >= cap {
        return;
    }
    if k == sizes.len() {
        if left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for v in 0..sizes[k].min(left + 1) {
        cur[k] = v;
        fill(sizes, left - v, k + 1, cur, out, cap);
    }
    cur[k] = 0;
}

#[derive(Clone, Debug)]
pub struct FixConfig {
    pub max_iterations: usize,
    pub seed: u64,
    pub pools: FixPools,
    /// Call budget of one evaluation.
    pub max_steps: usize,
    /// Small candidates tried before falling back to the largest one.
    pub max_candidates: usize,
    /// Compare a verdict with the bounded semantics when that is defined.
    pub cross_check: bool,
}

impl Default for FixConfig {
    fn default() -> Self {
        FixConfig {
            max_iterations: 50,
            seed: 0,
            pools: FixPools::default(),
            max_steps: DEFAULT_MAX_STEPS,
            max_candidates: 2000,
            cross_check: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixVerdict {
    Valid(FixY),
    Invalid(FixX),
    Budget,
}

/// `X` = opponent choices (ν ranks, ∀ instantiations), `Y` = proponent choices.
pub struct FixLagrangian<'a> {
    problem: &'a FixProblem,
    cfg: &'a FixConfig,
    layouts_x: Vec<Layout>,
    layouts_y: Vec<Layout>,
    rank_pools: Vec<Vec<RankingTemplate>>,
}

impl<'a> FixLagrangian<'a> {
    pub fn new(problem: &'a FixProblem, cfg: &'a FixConfig) -> Self {
        let comps: Vec<Comp> =
            std::iter::once(Comp::Query).chain((0..problem.defs.len()).map(Comp::Def)).collect();
        let lay = |side| comps.iter().map(|c| Layout::new(problem, *c, side, &cfg.pools)).collect();
        let rank_pools = problem
            .defs
            .iter()
            .map(|d| template_pool(d.params.len(), cfg.pools.max_coef, cfg.pools.max_offset))
            .collect();
        FixLagrangian { problem, cfg, layouts_x: lay(SkSide::Unsat), layouts_y: lay(SkSide::Sat), rank_pools }
    }

    fn owner(&self, side: SkSide) -> Mode {
        if side == SkSide::Sat {
            Mode::Mu
        } else {
            Mode::Nu
        }
    }

    fn layouts(&self, side: SkSide) -> &[Layout] {
        if side == SkSide::Sat {
            &self.layouts_y
        } else {
            &self.layouts_x
        }
    }

    fn assemble(&self, ranks: Vec<BTreeSet<RankingTemplate>>, sks: Vec<Skeleton>) -> FixChoice {
        let mut it = sks.into_iter();
        let query = it.next().unwrap();
        FixChoice { ranks, query, defs: it.collect() }
    }

    fn full_ranks(&self, side: SkSide) -> Vec<BTreeSet<RankingTemplate>> {
        (0..self.problem.defs.len())
            .map(|i| {
                if self.problem.mode(i) == self.owner(side) {
                    self.rank_pools[i].iter().cloned().collect()
                } else {
                    BTreeSet::new()
                }
            })
            .collect()
    }

    /// The largest candidate of `side`: every pool element everywhere.
    pub fn top(&self, side: SkSide) -> FixChoice {
        self.assemble(self.full_ranks(side), self.layouts(side).iter().map(Layout::top).collect())
    }

    pub fn bottom(&self, side: SkSide) -> FixChoice {
        let n = self.problem.defs.len();
        self.assemble(vec![BTreeSet::new(); n], self.layouts(side).iter().map(Layout::bottom).collect())
    }

    /// Single-branch skeletons with, per owned definition, no template or one,
    /// in increasing stratum; the opponent keeps all its templates.
    pub fn small(&self, side: SkSide) -> Vec<FixChoice> {
        let cap = self.cfg.max_candidates;
        let paths: Vec<Vec<Skeleton>> = self.layouts(side).iter().map(|l| l.paths(cap)).collect();
        let owned = self.problem.indices(self.owner(side));
        let rank_sizes: Vec<usize> = if side == SkSide::Sat {
            owned.iter().map(|i| self.rank_pools[*i].len() + 1).collect()
        } else {
            Vec::new()
        };
        let mut sizes = rank_sizes.clone();
        sizes.extend(paths.iter().map(|p| p.len()));
        let mut out = Vec::new();
        for idx in odometer(&sizes, cap) {
            let mut ranks = if side == SkSide::Sat { vec![BTreeSet::new(); self.problem.defs.len()] } else { self.full_ranks(side) };
            for (j, i) in owned.iter().enumerate().take(rank_sizes.len()) {
                if idx[j] > 0 {
                    ranks[*i].insert(self.rank_pools[*i][idx[j] - 1].clone());
                }
            }
            let sks = paths.iter().zip(&idx[rank_sizes.len()..]).map(|(p, k)| p[*k].clone()).collect();
            out.push(self.assemble(ranks, sks));
        }
        out
    }

    fn value(&self, x: &FixX, y: &FixY) -> Result<Outcome, FixError> {
        l_fix_capped(self.problem, x, y, self.cfg.max_steps)
    }

    /// `inf_x L(x, y) ≥ 0` over the pools: by anti-monotonicity only the top needs checking.
    pub fn certify_valid(&self, y: &FixY) -> Result<bool, FixError> {
        Ok(self.value(&self.top(SkSide::Unsat), y)?.is_positive())
    }

    pub fn certify_invalid(&self, x: &FixX) -> Result<bool, FixError> {
        Ok(self.value(x, &self.top(SkSide::Sat))?.is_negative())
    }
}

impl Lagrangian for FixLagrangian<'_> {
    type X = FixChoice;
    type Y = FixChoice;

    fn evaluate(&self, x: &FixX, y: &FixY) -> Outcome {
        self.value(x, y).expect("evaluation within the call budget")
    }

    fn range(&self) -> Vec<i32> {
        vec![-1, 1]
    }

    fn initial_x(&self) -> FixX {
        self.bottom(SkSide::Unsat)
    }

    fn initial_y(&self) -> FixY {
        self.bottom(SkSide::Sat)
    }

    fn dual_check(&self, beta: &FixY, _ctx: &mut CheckCtx<'_>) -> Check<FixX> {
        let top = self.top(SkSide::Unsat);
        match self.value(&top, beta) {
            Err(e) => return Check::Stuck(e.to_string()),
            Ok(v) if v.is_positive() => return Check::Pass,
            Ok(_) => {}
        }
        for x in self.small(SkSide::Unsat) {
            match self.value(&x, beta) {
                Ok(v) if v.is_negative() => return Check::Counter(x),
                Ok(_) => {}
                Err(e) => return Check::Stuck(e.to_string()),
            }
        }
        Check::Counter(top)
    }

    fn primal_check(&self, alpha: &FixX, _ctx: &mut CheckCtx<'_>) -> Check<FixY> {
        let top = self.top(SkSide::Sat);
        match self.value(alpha, &top) {
            Err(e) => return Check::Stuck(e.to_string()),
            Ok(v) if v.is_negative() => return Check::Pass,
            Ok(_) => {}
        }
        for y in self.small(SkSide::Sat) {
            match self.value(alpha, &y) {
                Ok(v) if v.is_positive() => return Check::Counter(y),
                Ok(_) => {}
                Err(e) => return Check::Stuck(e.to_string()),
            }
        }
        Check::Counter(top)
    }

    fn join_x(&self, a: &FixX, b: &FixX) -> Option<FixX> {
        a.join(b).ok()
    }

    fn join_y(&self, a: &FixY, b: &FixY) -> Option<FixY> {
        a.join(b).ok()
    }

    fn has_join_x(&self) -> bool {
        true
    }

    fn has_join_y(&self) -> bool {
        true
    }

    fn render_x(&self, x: &FixX) -> Value {
        Value::String(x.render(self.problem, SkSide::Unsat))
    }

    fn render_y(&self, y: &FixY) -> Value {
        Value::String(y.render(self.problem, SkSide::Sat))
    }
}

/// Decide a problem relative to the configured pools.
///
/// `Valid(y)`: no pool candidate of the opponent defeats `y`. `Invalid(x)`:
/// no pool candidate of the proponent defeats `x`.
pub fn run_fix(problem: &FixProblem, cfg: &FixConfig) -> Result<Report<FixVerdict>, FixError> {
    problem.validate()?;
    if cfg.max_iterations == 0 {
        return Ok(Report { verdict: FixVerdict::Budget, trace: json!([]), iterations: 0 });
    }
    let l = FixLagrangian::new(problem, cfg);
    let ecfg = EngineConfig {
        accumulate_x: true,
        accumulate_y: true,
        max_iterations: cfg.max_iterations,
        random_seed: cfg.seed,
        ..Default::default()
    };
    let run = match run_primal_dual(&l, &ecfg) {
        Ok(run) => run,
        Err(EngineError::Oracle { reason, .. }) => return Err(FixError::IllFormed(reason)),
        Err(EngineError::Config(m)) => unreachable!("engine configuration is fixed here: {m}"),
    };
    let verdict = match run.verdict {
        Verdict::DualWitness(y) => FixVerdict::Valid(y),
        Verdict::PrimalWitness(x) => FixVerdict::Invalid(x),
        Verdict::Budget => FixVerdict::Budget,
    };
    if cfg.cross_check && verdict != FixVerdict::Budget {
        if let Ok(truth) = bounded_semantics_oracle(problem, cfg.pools.domain_bound) {
            if truth != matches!(verdict, FixVerdict::Valid(_)) {
                return Err(FixError::OracleDisagrees { oracle: truth });
            }
        }
    }
    Ok(Report { verdict, trace: trace_to_json(&l, &run.trace), iterations: run.trace.len() })
}

pub fn describe(problem: &FixProblem, v: &FixVerdict) -> String {
    match v {
        FixVerdict::Valid(y) => {
            format!("valid; ranks {}; proponent {}", y.describe_ranks(problem).join("; "), y.render(problem, SkSide::Sat))
        }
        FixVerdict::Invalid(x) => format!("invalid; opponent {}", x.render(problem, SkSide::Unsat)),
        FixVerdict::Budget => "budget exhausted".into(),
    }
}

/// A random problem whose calls stay in `[0, m)` through `mod m`, with
/// quantifier-free bodies and a query that is a call or a quantified call.
pub fn random_problem<R: Rng>(rng: &mut R, m: i64) -> FixProblem {
    let n = rng.gen_range(1..=2);
    let names: Vec<String> = (0..n).map(|i| ["P", "Q"][i].to_string()).collect();
    let modulo = num_bigint::BigInt::from(m);
    let call = |rng: &mut R, arg: LinTerm| {
        let j = rng.gen_range(0..n);
        let t = LinTerm::modulo(arg, modulo.clone()).expect("integer term");
        Fx::Call(j, names[j].clone(), vec![t])
    };
    let x = LinTerm::var("x");
    let mut defs = Vec::new();
    for name in &names {
        let mut items = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let c = LinTerm::int(rng.gen_range(0..m));
            let lit = match rng.gen_range(0..5) {
                0 => Fx::Lit(Formula::atom(&x, crate::lra::Rel::Le, &c)),
                1 => Fx::Lit(Formula::atom(&x, crate::lra::Rel::Eq, &c)),
                2 => Fx::Lit(Formula::atom(&c, crate::lra::Rel::Le, &x)),
                _ => {
                    let a = [1, -1, 2][rng.gen_range(0..3)];
                    let k = rng.gen_range(-2..=2);
                    call(rng, x.scale(&q(a)).add_const(&q(k)))
                }
            };
            items.push(lit);
        }
        let body = if rng.gen_bool(0.5) { Fx::and(items) } else { Fx::or(items) };
        let mode = if rng.gen_bool(0.5) { Mode::Mu } else { Mode::Nu };
        defs.push(Def {
            name: name.clone(),
            params: vec!["x".into()],
            mode,
            body: FixPrenex { prefix: vec![], matrix: body },
        });
    }
    let query = match rng.gen_range(0..3) {
        0 => {
            let c = rng.gen_range(0..m);
            FixPrenex { prefix: vec![], matrix: call(rng, LinTerm::int(c)) }
        }
        k => {
            let qn = if k == 1 { Quant::Forall } else { Quant::Exists };
            FixPrenex { prefix: vec![(qn, "y".into())], matrix: call(rng, LinTerm::var("y")) }
        }
    };
    FixProblem { defs, query }
}

/// Pools under which [`run_fix`] is exact on [`random_problem`] instances.
pub fn fine_pools(m: i64) -> FixPools {
    FixPools { max_coef: 1, max_offset: m, term_depth: 1, domain_bound: m }
}

/// Integer value of a ground term, if it is one.
pub fn ground_int(t: &LinTerm) -> Option<i64> {
    let v = t.eval(&Assignment::new()).ok()?;
    if v.is_integer() {
        v.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlra::parse_skeleton;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CONTROL: &str = "
        (define (P x) :mu
          (forall (i)
            (and (=> (or (< x 42) (= i 0)) true)
                 (=> (and (>= x 42) (not (= i 0))) (or (P (+ x i)) (P (- x i)))))))
        (query (forall (x) (P x)))";

    const COUNTDOWN: &str = "(define (P x) :mu (or (<= x 0) (P (- x 1)))) (query (P 2))";

    fn choice(p: &FixProblem, ranks: Vec<Vec<RankingTemplate>>, query: &str, defs: &[&str]) -> FixChoice {
        assert_eq!(defs.len(), p.defs.len());
        FixChoice {
            ranks: ranks.into_iter().map(|r| r.into_iter().collect()).collect(),
            query: parse_skeleton(query).unwrap(),
            defs: defs.iter().map(|s| parse_skeleton(s).unwrap()).collect(),
        }
    }

    #[test]
    fn countdown_with_and_without_a_ranking() {
        let p = parse_fix_problem(COUNTDOWN).unwrap();
        let x = choice(&p, vec![vec![]], "*", &["*"]);
        let good = choice(&p, vec![vec![RankingTemplate::new(vec![1], 0)]], "*", &["*"]);
        let flat = choice(&p, vec![vec![RankingTemplate::new(vec![0], 0)]], "*", &["*"]);
        assert_eq!(l_fix(&p, &x, &good).unwrap(), Outcome::POS);
        assert_eq!(l_fix(&p, &x, &flat).unwrap(), Outcome::NEG);
        assert!(bounded_semantics_oracle(&p, 4).unwrap());
    }

    #[test]
    fn closed_true_atom_needs_nothing() {
        let p = parse_fix_problem("(query (<= 1 2))").unwrap();
        let r = run_fix(&p, &FixConfig::default()).unwrap();
        assert!(matches!(r.verdict, FixVerdict::Valid(_)));
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn single_instantiation() {
        let p = parse_fix_problem("(define (P x) :nu (P x)) (query (forall (x) (P x)))").unwrap();
        let x = choice(&p, vec![vec![]], "(choose (5 *))", &["*"]);
        let y = choice(&p, vec![vec![]], "(forall x *)", &["*"]);
        let (q, defs) = build_qf_approx(&p, &x, &y).unwrap();
        assert_eq!(q.to_string(), "(P 5)");
        assert_eq!(defs[0].to_string(), "(P x)");
        assert!(bounded_semantics_oracle(&p, 3).unwrap());
    }

    #[test]
    fn control_example_is_valid() {
        let p = parse_fix_problem(CONTROL).unwrap();
        let cfg = FixConfig { pools: FixPools { domain_bound: 64, ..FixPools::default() }, ..FixConfig::default() };
        let r = run_fix(&p, &cfg).unwrap();
        let FixVerdict::Valid(y) = &r.verdict else { panic!("{:?}", r.verdict) };
        assert!(FixLagrangian::new(&p, &cfg).certify_valid(y).unwrap());
        assert!(bounded_semantics_oracle(&p, 64).unwrap());
    }

    #[test]
    fn unbounded_choice_never_terminates() {
        let p = parse_fix_problem("(define (P x) :mu (exists (z) (P z))) (query (P 0))").unwrap();
        assert!(!bounded_semantics_oracle(&p, 8).unwrap());
        let syms = skolemize_choices(&p.defs);
        assert_eq!(syms.len(), 1);
        assert_eq!(render_skolem(&p.defs, &syms), vec!["P(x) =μ (P (f1 x))".to_string()]);
        for seed in 0..5 {
            let r = run_fix(&p, &FixConfig { seed, ..FixConfig::default() }).unwrap();
            assert!(!matches!(r.verdict, FixVerdict::Valid(_)));
        }
    }

    #[test]
    fn skolem_symbols_see_parameters_only() {
        let p = parse_fix_problem(
            "(define (P x y) :nu (forall (w) (exists (a) (exists (b) (and (P a b) (<= w x)))))) (query (P 0 0))",
        )
        .unwrap();
        let syms = skolemize_choices(&p.defs);
        assert_eq!(syms.len(), 2);
        assert!(syms.iter().all(|s| s.params == ["x", "y"]));
        let bad = apply_skolem(&p.defs, &syms, &[LinTerm::var("w"), LinTerm::zero()]);
        assert!(bad.is_err());
        let ok = apply_skolem(&p.defs, &syms, &[LinTerm::var("y"), LinTerm::var("x")]).unwrap();
        assert_eq!(ok[0].body.prefix.len(), 1);
        let none = parse_fix_problem(COUNTDOWN).unwrap();
        assert!(skolemize_choices(&none.defs).is_empty());
    }

    #[test]
    fn greatest_fixpoint_of_identity_is_true() {
        let p = parse_fix_problem("(define (P x) :nu (P x)) (query (forall (x) (P x)))").unwrap();
        assert!(bounded_semantics_oracle(&p, 5).unwrap());
    }

    #[test]
    fn alternation_follows_priority() {
        // Q outranks P, so the infinite play P Q P Q … is decided by Q.
        let p = parse_fix_problem("(define (Q x) :mu (P x)) (define (P x) :nu (Q x)) (query (P 0))").unwrap();
        assert!(!bounded_semantics_oracle(&p, 2).unwrap());
        let r = run_fix(&p, &FixConfig::default()).unwrap();
        assert!(matches!(r.verdict, FixVerdict::Invalid(_)), "{:?}", r.verdict);
        let p = parse_fix_problem("(define (P x) :nu (Q x)) (define (Q x) :mu (P x)) (query (Q 0))").unwrap();
        assert!(bounded_semantics_oracle(&p, 2).unwrap());
        let r = run_fix(&p, &FixConfig::default()).unwrap();
        assert!(matches!(r.verdict, FixVerdict::Valid(_)), "{:?}", r.verdict);
    }

    #[test]
    fn choice_round_trips() {
        let p = parse_fix_problem(CONTROL).unwrap();
        let c = choice(&p, vec![vec![RankingTemplate::new(vec![1], -41)]], "(forall x *)", &["(forall i *)"]);
        assert_eq!(parse_fix_choice(&c.render(&p, SkSide::Sat), &p).unwrap(), c);
    }

    #[test]
    fn fuzzed_problems_agree_with_semantics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = 4;
        let mut decided = 0;
        for _ in 0..60 {
            let p = random_problem(&mut rng, m);
            let cfg = FixConfig { pools: fine_pools(m), cross_check: true, ..FixConfig::default() };
            let r = run_fix(&p, &cfg).unwrap_or_else(|e| panic!("{p}: {e}"));
            if r.verdict != FixVerdict::Budget {
                decided += 1;
            }
        }
        assert!(decided >= 55);
    }
}
