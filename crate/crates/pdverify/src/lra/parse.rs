//! Text syntax: `(forall (x) (or (< x y) (<= (+ x 1) z)))`, rationals as `n/d`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Formula, LinTerm, Prenex, Quant, Rational, Rel};
use crate::sexp::{parse_one, ParseError, Sexp};

pub fn parse_term(src: &str) -> Result<LinTerm, ParseError> {
    term_of(&parse_one(src)?)
}

pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    formula_of(&parse_one(src)?)
}

pub fn parse_prenex(src: &str) -> Result<Prenex, ParseError> {
    prenex_of(&parse_one(src)?)
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '!' || c == '.')
}

pub fn term_of(e: &Sexp) -> Result<LinTerm, ParseError> {
    match e {
        Sexp::Atom(s, p) => {
            if let Some(r) = parse_rational(s) {
                Ok(LinTerm::constant(r))
            } else if is_ident(s) {
                Ok(LinTerm::var(s))
            } else {
                Err(ParseError::new(*p, format!("bad term '{s}'")))
            }
        }
        Sexp::List(items, p) => {
            let head = e.head().ok_or_else(|| ParseError::new(*p, "term must start with an operator"))?;
            let args = &items[1..];
            let ts = || args.iter().map(term_of).collect::<Result<Vec<_>, _>>();
            match head {
                "+" => Ok(ts()?.iter().fold(LinTerm::zero(), |a, b| a.add(b))),
                "-" => {
                    let v = ts()?;
                    match v.len() {
                        0 => Err(ParseError::new(*p, "'-' needs arguments")),
                        1 => Ok(v[0].neg()),
                        _ => Ok(v[1..].iter().fold(v[0].clone(), |a, b| a.sub(b))),
                    }
                }
                "*" => {
                    let v = ts()?;
                    let mut acc = LinTerm::int(1);
                    for t in v {
                        if acc.is_constant() {
                            acc = t.scale(acc.const_part());
                        } else if t.is_constant() {
                            acc = acc.scale(t.const_part());
                        } else {
                            return Err(ParseError::new(*p, "nonlinear product"));
                        }
                    }
                    Ok(acc)
                }
                "/" => {
                    let v = ts()?;
                    if v.len() != 2 || !v[1].is_constant() || v[1].const_part().is_zero() {
                        return Err(ParseError::new(*p, "'/' needs a term and a nonzero constant"));
                    }
                    Ok(v[0].scale(&v[1].const_part().recip()))
                }
                "mod" => {
                    if args.len() != 2 {
                        return Err(ParseError::new(*p, "'mod' takes two arguments"));
                    }
                    let t = term_of(&args[0])?;
                    let n: BigInt = args[1]
                        .as_atom()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| ParseError::new(args[1].pos(), "modulus must be an integer literal"))?;
                    LinTerm::modulo(t, n).map_err(|err| ParseError::new(*p, err.to_string()))
                }
                _ => Err(ParseError::new(*p, format!("unknown term operator '{head}'"))),
            }
        }
    }
}

/// Parse a comparison `(op a b)` if `op` is one; `None` for other heads.
pub fn comparison_of(e: &Sexp) -> Option<Result<Formula, ParseError>> {
    let head = e.head()?;
    let rel = match head {
        "<" | "<=" | "=" | ">" | ">=" | "!=" | "distinct" => head,
        _ => return None,
    };
    let items = e.as_list().unwrap();
    Some((|| {
        if items.len() != 3 {
            return Err(ParseError::new(e.pos(), format!("'{rel}' takes two arguments")));
        }
        let a = term_of(&items[1])?;
        let b = term_of(&items[2])?;
        Ok(match rel {
            "<" => Formula::atom(&a, Rel::Lt, &b),
            "<=" => Formula::atom(&a, Rel::Le, &b),
            "=" => Formula::atom(&a, Rel::Eq, &b),
            ">" => Formula::atom(&b, Rel::Lt, &a),
            ">=" => Formula::atom(&b, Rel::Le, &a),
            _ => Formula::atom(&a, Rel::Eq, &b).negate(),
        })
    })())
}

pub fn formula_of(e: &Sexp) -> Result<Formula, ParseError> {
    if let Some(s) = e.as_atom() {
        return match s {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            _ => Err(ParseError::new(e.pos(), format!("expected formula, found '{s}'"))),
        };
    }
    if let Some(r) = comparison_of(e) {
        return r;
    }
    let items = e.as_list().unwrap();
    let head = e.head().ok_or_else(|| ParseError::new(e.pos(), "formula must start with an operator"))?;
    let args = &items[1..];
    let fs = || args.iter().map(formula_of).collect::<Result<Vec<_>, _>>();
    match head {
        "and" => Ok(Formula::and(fs()?)),
        "or" => Ok(Formula::or(fs()?)),
        "not" if args.len() == 1 => Ok(formula_of(&args[0])?.negate()),
        "=>" if args.len() == 2 => {
            let v = fs()?;
            Ok(Formula::or(vec![v[0].negate(), v[1].clone()]))
        }
        "forall" | "exists" => Err(ParseError::new(e.pos(), "quantifier inside a quantifier-free position")),
        _ => Err(ParseError::new(e.pos(), format!("unknown formula operator '{head}'"))),
    }
}

/// Bound variables of `(forall (x y) …)`.
pub fn binder_vars(e: &Sexp) -> Result<Vec<String>, ParseError> {
    e.expect_list("binder")?
        .iter()
        .map(|v| {
            let s = v.expect_atom("bound variable")?;
            if is_ident(s) {
                Ok(s.to_string())
            } else {
                Err(ParseError::new(v.pos(), format!("bad variable name '{s}'")))
            }
        })
        .collect()
}

pub fn prenex_of(e: &Sexp) -> Result<Prenex, ParseError> {
    let mut prefix = Vec::new();
    let mut cur = e;
    loop {
        match cur.head() {
            Some(h @ ("forall" | "exists")) => {
                let items = cur.as_list().unwrap();
                if items.len() != 3 {
                    return Err(ParseError::new(cur.pos(), format!("'{h}' takes a binder and a body")));
                }
                let qn = if h == "forall" { Quant::Forall } else { Quant::Exists };
                for v in binder_vars(&items[1])? {
                    if prefix.iter().any(|(_, w)| *w == v) {
                        return Err(ParseError::new(items[1].pos(), format!("variable {v} bound twice")));
                    }
                    prefix.push((qn, v));
                }
                cur = &items[2];
            }
            _ => return Ok(Prenex::new(prefix, formula_of(cur)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_terms() {
        let t = parse_term("(+ (* 2 x) (- y 3) 1/2)").unwrap();
        assert_eq!(t.to_string(), "(+ (* 2 x) y -5/2)");
        assert!(parse_term("(* x y)").is_err());
        assert_eq!(parse_term("(/ x 2)").unwrap(), parse_term("(* 1/2 x)").unwrap());
    }

    #[test]
    fn parses_prenex() {
        let p = parse_prenex("(exists (w) (forall (x) (< x w)))").unwrap();
        assert_eq!(p.prefix.len(), 2);
        assert!(parse_prenex("(forall (x) (and (exists (y) (< x y))))").is_err());
        assert!(parse_prenex("(forall (x x) (< x 1))").is_err());
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = parse_formula("(and (< x 1)\n (foo y))").unwrap_err();
        assert_eq!((e.pos.line, e.pos.col), (2, 2));
    }
}
