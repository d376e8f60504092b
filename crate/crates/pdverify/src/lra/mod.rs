//! Exact linear rational arithmetic: terms, atoms, NNF formulas and prenex sentences.
//!
//! Atoms are kept as `t ⋈ 0` with `⋈ ∈ {<, ≤, =}` and a canonical scaling, so
//! syntactic equality of formulas coincides with equality after normalization.
//! Integer-sorted terms may contain `t mod n` leaves; those are only ever evaluated.

mod fm;
mod mbp;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use fm::{conj_sat, forall_validity, qf_sat, Sat, Validity};
pub use mbp::{fmt_model, mbp_term};
pub use parse::{
    binder_vars, comparison_of, formula_of, parse_formula, parse_prenex, parse_rational, parse_term, prenex_of, term_of,
};

pub type Rational = num_rational::BigRational;
pub type Assignment = BTreeMap<String, Rational>;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Print a rational as `n` or `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LraError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("model falsifies atom {0}")]
    ModelMismatch(String),
}

/// A summand position of a linear term: a variable or an integer `mod` leaf.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Leaf {
    Var(String),
    Mod(Box<LinTerm>, BigInt),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinTerm {
    coeffs: BTreeMap<Leaf, Rational>,
    constant: Rational,
}

impl LinTerm {
    pub fn zero() -> Self {
        LinTerm::default()
    }

    pub fn constant(c: Rational) -> Self {
        LinTerm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn int(c: i64) -> Self {
        LinTerm::constant(q(c))
    }

    pub fn var(name: &str) -> Self {
        Self::leaf(Leaf::Var(name.to_string()))
    }

    pub fn leaf(l: Leaf) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(l, Rational::one());
        LinTerm { coeffs, constant: Rational::zero() }
    }

    /// `t mod n`; a constant `t` is folded.
    pub fn modulo(t: LinTerm, n: BigInt) -> Result<Self, LraError> {
        if !n.is_positive() {
            return Err(LraError::SortMismatch(format!("modulus {n} must be positive")));
        }
        if t.coeffs.values().chain([&t.constant]).any(|c| !c.is_integer()) {
            return Err(LraError::SortMismatch(format!("mod over non-integral term {t}")));
        }
        if t.coeffs.is_empty() {
            let v = t.constant.to_integer().mod_floor(&n);
            return Ok(LinTerm::constant(Rational::from_integer(v)));
        }
        Ok(Self::leaf(Leaf::Mod(Box::new(t), n)))
    }

    pub fn const_part(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Leaf, &Rational)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, x: &str) -> Rational {
        self.coeffs.get(&Leaf::Var(x.to_string())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn has_mod(&self) -> bool {
        self.coeffs.keys().any(|l| matches!(l, Leaf::Mod(..)))
    }

    /// Free variables, including those under `mod` leaves.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for l in self.coeffs.keys() {
            match l {
                Leaf::Var(v) => {
                    out.insert(v.clone());
                }
                Leaf::Mod(t, _) => t.collect_vars(out),
            }
        }
    }

    pub fn add(&self, other: &LinTerm) -> LinTerm {
        let mut r = self.clone();
        for (l, c) in &other.coeffs {
            r.add_leaf(l.clone(), c.clone());
        }
        r.constant += &other.constant;
        r
    }

    pub fn sub(&self, other: &LinTerm) -> LinTerm {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn neg(&self) -> LinTerm {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> LinTerm {
        if k.is_zero() {
            return LinTerm::zero();
        }
        LinTerm {
            coeffs: self.coeffs.iter().map(|(l, c)| (l.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_const(&self, k: &Rational) -> LinTerm {
        let mut r = self.clone();
        r.constant += k;
        r
    }

    fn add_leaf(&mut self, l: Leaf, c: Rational) {
        let e = self.coeffs.entry(l.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&l);
        }
    }

    /// Drop the `x` summand, returning its coefficient.
    pub fn split_var(&self, x: &str) -> (Rational, LinTerm) {
        let mut rest = self.clone();
        let c = rest.coeffs.remove(&Leaf::Var(x.to_string())).unwrap_or_else(Rational::zero);
        (c, rest)
    }

    /// Capture-free substitution `self[x := t]`, renormalized.
    pub fn substitute(&self, x: &str, t: &LinTerm) -> Result<LinTerm, LraError> {
        let mut r = LinTerm::constant(self.constant.clone());
        for (l, c) in &self.coeffs {
            match l {
                Leaf::Var(v) if v == x => r = r.add(&t.scale(c)),
                Leaf::Var(_) => r.add_leaf(l.clone(), c.clone()),
                Leaf::Mod(inner, n) => {
                    let s = inner.substitute(x, t)?;
                    r = r.add(&LinTerm::modulo(s, n.clone())?.scale(c));
                }
            }
        }
        Ok(r)
    }

    pub fn eval(&self, a: &Assignment) -> Result<Rational, LraError> {
        let mut v = self.constant.clone();
        for (l, c) in &self.coeffs {
            let lv = match l {
                Leaf::Var(x) => a.get(x).cloned().ok_or_else(|| LraError::UnboundVariable(x.clone()))?,
                Leaf::Mod(t, n) => {
                    let inner = t.eval(a)?;
                    if !inner.is_integer() {
                        return Err(LraError::SortMismatch(format!("mod of non-integer value in {t}")));
                    }
                    Rational::from_integer(inner.to_integer().mod_floor(n))
                }
            };
            v += c * lv;
        }
        Ok(v)
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (l, c) in &self.coeffs {
            let leaf = match l {
                Leaf::Var(v) => v.clone(),
                Leaf::Mod(t, n) => format!("(mod {t} {n})"),
            };
            if c.is_one() {
                parts.push(leaf);
            } else {
                parts.push(format!("(* {} {leaf})", fmt_rational(c)));
            }
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(fmt_rational(&self.constant));
        }
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "(+ {})", parts.join(" "))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        }
    }

    fn holds(self, v: &Rational) -> bool {
        match self {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
        }
    }
}

/// `term ⋈ 0`, normalized: leading coefficient ±1 (exactly 1 for `=`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub term: LinTerm,
    pub rel: Rel,
}

impl Atom {
    /// `lhs ⋈ rhs`, folded to a constant when no leaves remain.
    pub fn build(lhs: &LinTerm, rel: Rel, rhs: &LinTerm) -> Formula {
        Self::from_term(lhs.sub(rhs), rel)
    }

    pub fn from_term(t: LinTerm, rel: Rel) -> Formula {
        if t.is_constant() {
            return Formula::bool(rel.holds(&t.constant));
        }
        let lead = t.coeffs.values().next().unwrap().clone();
        let k = if rel == Rel::Eq { lead.recip() } else { lead.abs().recip() };
        Formula::Atom(Atom { term: t.scale(&k), rel })
    }

    pub fn holds(&self, a: &Assignment) -> Result<bool, LraError> {
        Ok(self.rel.holds(&self.term.eval(a)?))
    }

    /// NNF negation; `¬(t = 0)` becomes `t < 0 ∨ −t < 0`.
    pub fn negate(&self) -> Formula {
        match self.rel {
            Rel::Lt => Atom::from_term(self.term.neg(), Rel::Le),
            Rel::Le => Atom::from_term(self.term.neg(), Rel::Lt),
            Rel::Eq => Formula::or(vec![
                Atom::from_term(self.term.clone(), Rel::Lt),
                Atom::from_term(self.term.neg(), Rel::Lt),
            ]),
        }
    }

    pub fn substitute(&self, x: &str, t: &LinTerm) -> Result<Formula, LraError> {
        Ok(Atom::from_term(self.term.substitute(x, t)?, self.rel))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Print as `pos ⋈ neg` with nonnegative coefficients on both sides.
        let mut pos = LinTerm::zero();
        let mut neg = LinTerm::zero();
        for (l, c) in &self.term.coeffs {
            if c.is_positive() {
                pos.add_leaf(l.clone(), c.clone());
            } else {
                neg.add_leaf(l.clone(), -c.clone());
            }
        }
        if self.term.constant.is_positive() {
            pos.constant = self.term.constant.clone();
        } else {
            neg.constant = -self.term.constant.clone();
        }
        write!(f, "({} {pos} {neg})", self.rel.symbol())
    }
}

/// Quantifier-free NNF formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn bool(b: bool) -> Self {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    /// Flattening conjunction with unit/absorbing constants.
    pub fn and(items: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(v) => out.extend(v),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(items: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(v) => out.extend(v),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn atom(lhs: &LinTerm, rel: Rel, rhs: &LinTerm) -> Formula {
        Atom::build(lhs, rel, rhs)
    }

    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) => a.negate(),
            Formula::And(v) => Formula::or(v.iter().map(Formula::negate).collect()),
            Formula::Or(v) => Formula::and(v.iter().map(Formula::negate).collect()),
        }
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool, LraError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(at) => at.holds(a),
            Formula::And(v) => {
                for f in v {
                    if !f.eval(a)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(v) => {
                for f in v {
                    if f.eval(a)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    pub fn substitute(&self, x: &str, t: &LinTerm) -> Result<Formula, LraError> {
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => a.substitute(x, t)?,
            Formula::And(v) => Formula::and(v.iter().map(|f| f.substitute(x, t)).collect::<Result<_, _>>()?),
            Formula::Or(v) => Formula::or(v.iter().map(|f| f.substitute(x, t)).collect::<Result<_, _>>()?),
        })
    }

    /// Substitute several variables one after another.
    pub fn substitute_all(&self, subst: &[(String, LinTerm)]) -> Result<Formula, LraError> {
        let mut f = self.clone();
        for (x, t) in subst {
            f = f.substitute(x, t)?;
        }
        Ok(f)
    }

    pub fn rename(&self, from: &str, to: &str) -> Formula {
        self.substitute(from, &LinTerm::var(to)).expect("renaming keeps sorts")
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.walk_atoms(&mut |a| s.extend(a.term.vars()));
        s
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut v = Vec::new();
        self.walk_atoms(&mut |a| v.push(a.clone()));
        v
    }

    fn walk_atoms(&self, f: &mut dyn FnMut(&Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| g.walk_atoms(f)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(v) | Formula::Or(v) => {
                write!(f, "({}", if matches!(self, Formula::And(_)) { "and" } else { "or" })?;
                for g in v {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn eval_ground(f: &Formula, a: &Assignment) -> Result<bool, LraError> {
    f.eval(a)
}

pub fn substitute(f: &Formula, x: &str, t: &LinTerm) -> Result<Formula, LraError> {
    f.substitute(x, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quant {
    Forall,
    Exists,
}

/// A prenex formula `Q₁x₁ … Qₙxₙ. matrix`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Prenex {
    pub prefix: Vec<(Quant, String)>,
    pub matrix: Formula,
}

impl Prenex {
    pub fn new(prefix: Vec<(Quant, String)>, matrix: Formula) -> Self {
        Prenex { prefix, matrix }
    }

    pub fn qf(matrix: Formula) -> Self {
        Prenex { prefix: Vec::new(), matrix }
    }

    pub fn bound_vars(&self) -> Vec<String> {
        self.prefix.iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut fv = self.matrix.vars();
        for (_, v) in &self.prefix {
            fv.remove(v);
        }
        fv
    }

    /// Drop the outermost quantifier.
    pub fn body(&self) -> Prenex {
        Prenex { prefix: self.prefix[1..].to_vec(), matrix: self.matrix.clone() }
    }

    /// Substitute a free (or outermost-bound-then-stripped) variable.
    pub fn substitute(&self, x: &str, t: &LinTerm) -> Result<Prenex, LraError> {
        if self.prefix.iter().any(|(_, v)| v == x) {
            return Ok(self.clone());
        }
        let captured: Vec<&String> =
            self.prefix.iter().map(|(_, v)| v).filter(|v| t.vars().contains(*v)).collect();
        if !captured.is_empty() {
            return Err(LraError::SortMismatch(format!("substituting {t} for {x} would capture {captured:?}")));
        }
        Ok(Prenex { prefix: self.prefix.clone(), matrix: self.matrix.substitute(x, t)? })
    }

    pub fn is_universal(&self) -> bool {
        self.prefix.iter().all(|(q, _)| *q == Quant::Forall)
    }

    /// Dual formula `¬φ` in prenex form.
    pub fn negate(&self) -> Prenex {
        Prenex {
            prefix: self
                .prefix
                .iter()
                .map(|(q, v)| (if *q == Quant::Forall { Quant::Exists } else { Quant::Forall }, v.clone()))
                .collect(),
            matrix: self.matrix.negate(),
        }
    }
}

impl fmt::Display for Prenex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Group consecutive quantifiers of the same kind.
        let mut groups: Vec<(Quant, Vec<&str>)> = Vec::new();
        for (qn, v) in &self.prefix {
            match groups.last_mut() {
                Some((g, vs)) if g == qn => vs.push(v),
                _ => groups.push((*qn, vec![v])),
            }
        }
        let mut s = self.matrix.to_string();
        for (qn, vs) in groups.iter().rev() {
            let kw = if *qn == Quant::Forall { "forall" } else { "exists" };
            s = format!("({kw} ({}) {s})", vs.join(" "));
        }
        write!(f, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asg(pairs: &[(&str, i64)]) -> Assignment {
        pairs.iter().map(|(k, v)| (k.to_string(), q(*v))).collect()
    }

    /// θ(w,x,y,z) = (y < 1 ∨ 2w < y) ∧ (z < y ∨ x < z)
    pub(crate) fn theta() -> Formula {
        parse_formula("(and (or (< y 1) (< (* 2 w) y)) (or (< z y) (< x z)))").unwrap()
    }

    #[test]
    fn eval_ground_examples() {
        let f = parse_formula("(and (<= x 3) (<= 2 x))").unwrap();
        assert!(eval_ground(&f, &asg(&[("x", 2)])).unwrap());
        assert!(!eval_ground(&theta(), &asg(&[("w", 0), ("x", -1), ("y", -1), ("z", -1)])).unwrap());
        let m = parse_formula("(= (mod 5 3) 2)").unwrap();
        assert_eq!(m, Formula::True);
        let m = parse_formula("(= (mod x 3) 2)").unwrap();
        assert!(eval_ground(&m, &asg(&[("x", 5)])).unwrap());
        assert!(eval_ground(&m, &asg(&[("x", -1)])).unwrap());
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let f = parse_formula("(< x y)").unwrap();
        assert_eq!(eval_ground(&f, &asg(&[("x", 0)])), Err(LraError::UnboundVariable("y".into())));
    }

    #[test]
    fn substitution_examples() {
        let f = parse_formula("(< x y)").unwrap();
        let g = f.substitute("y", &parse_term("(+ x 1)").unwrap()).unwrap();
        assert_eq!(g, Formula::True);
        // θ[w:=0][y:=x]
        let t = theta().substitute("w", &LinTerm::int(0)).unwrap().substitute("y", &LinTerm::var("x")).unwrap();
        let expected = parse_formula("(and (or (< x 1) (< 0 x)) (or (< z x) (< x z)))").unwrap();
        assert_eq!(t, expected);
        // (2w < y)[w := (w+y)/2] is w < 0
        let h = parse_formula("(< (* 2 w) y)").unwrap();
        let s = h.substitute("w", &parse_term("(* 1/2 (+ w y))").unwrap()).unwrap();
        assert_eq!(s, parse_formula("(< w 0)").unwrap());
    }

    #[test]
    fn normalization_is_canonical() {
        let a = parse_formula("(< (* 2 x) (* 4 y))").unwrap();
        let b = parse_formula("(< x (* 2 y))").unwrap();
        assert_eq!(a, b);
        let e1 = parse_formula("(= (* -3 x) 6)").unwrap();
        let e2 = parse_formula("(= x -2)").unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn negation_flips_strictness() {
        let f = parse_formula("(< x y)").unwrap();
        assert_eq!(f.negate(), parse_formula("(<= y x)").unwrap());
    }

    #[test]
    fn mod_requires_integer_values() {
        let m = parse_formula("(= (mod x 2) 0)").unwrap();
        let mut a = Assignment::new();
        a.insert("x".into(), qr(1, 2));
        assert!(matches!(eval_ground(&m, &a), Err(LraError::SortMismatch(_))));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "(forall (x) (or (< x y) (<= (+ x 1) z)))",
            "(exists (w) (forall (x) (exists (y) (forall (z) (and (< (* 1/2 y) w) (= x 3))))))",
        ] {
            let p = parse_prenex(s).unwrap();
            assert_eq!(parse_prenex(&p.to_string()).unwrap(), p);
        }
    }
}
