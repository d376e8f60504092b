//! Model-guided choice of a substitution term for one variable.

use num_traits::{One, Signed};

use super::{fmt_rational, Assignment, Atom, LinTerm, LraError, Rational, Rel};

struct Bound {
    term: LinTerm,
    value: Rational,
}

/// A term `t` over the other variables such that `atoms[x := t]` still holds under `m`.
///
/// Rule: a non-strict bound touched by `m(x)` (equalities included) wins;
/// otherwise the midpoint of the tightest lower and upper bounds; otherwise
/// the one-sided bound ±1; otherwise the constant `m(x)`.
pub fn mbp_term(x: &str, m: &Assignment, atoms: &[Atom]) -> Result<LinTerm, LraError> {
    for a in atoms {
        if !a.holds(m)? {
            return Err(LraError::ModelMismatch(a.to_string()));
        }
    }
    let mx = m.get(x).cloned().ok_or_else(|| LraError::UnboundVariable(x.to_string()))?;

    let mut lower: Vec<Bound> = Vec::new();
    let mut upper: Vec<Bound> = Vec::new();
    for a in atoms {
        let (c, rest) = a.term.split_var(x);
        if c == Rational::from_integer(0.into()) {
            continue;
        }
        // c·x + rest ⋈ 0  ⇔  x ⋈' −rest/c
        let term = rest.scale(&-c.recip());
        let value = term.eval(m)?;
        if a.rel == Rel::Eq || (a.rel == Rel::Le && value == mx) {
            return Ok(term);
        }
        let b = Bound { term, value };
        if c.is_positive() {
            upper.push(b);
        } else {
            lower.push(b);
        }
    }
    // First occurrence wins ties so the choice is deterministic.
    let best = |bs: &[Bound], lower: bool| -> Option<usize> {
        let mut idx: Option<usize> = None;
        for (i, b) in bs.iter().enumerate() {
            idx = match idx {
                None => Some(i),
                Some(j) => {
                    let better = if lower { b.value > bs[j].value } else { b.value < bs[j].value };
                    Some(if better { i } else { j })
                }
            };
        }
        idx
    };
    let one = Rational::one();
    Ok(match (best(&lower, true), best(&upper, false)) {
        (Some(l), Some(u)) => lower[l].term.add(&upper[u].term).scale(&(one.clone() / (one.clone() + one))),
        (Some(l), None) => lower[l].term.add_const(&one),
        (None, Some(u)) => upper[u].term.add_const(&-one),
        (None, None) => LinTerm::constant(mx),
    })
}

/// Human-readable form of a model, `x=1 y=-1/2`.
pub fn fmt_model(m: &Assignment) -> String {
    m.iter().map(|(k, v)| format!("{k}={}", fmt_rational(v))).collect::<Vec<_>>().join(" ")
}
