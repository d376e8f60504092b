//! Minimal s-expression reader with line/column positions.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError { pos, msg: msg.into() }
    }
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v, _) => Some(v),
            Sexp::Atom(..) => None,
        }
    }

    pub fn expect_list(&self, what: &str) -> Result<&[Sexp], ParseError> {
        self.as_list()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected list for {what}")))
    }

    pub fn expect_atom(&self, what: &str) -> Result<&str, ParseError> {
        self.as_atom()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected atom for {what}")))
    }

    /// Head symbol of a list, if it is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|v| v.first()).and_then(|h| h.as_atom())
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::List(v, _) => {
                write!(f, "(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parse every top-level expression in `src`. `;` starts a line comment.
pub fn parse_all(src: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut p = Reader { chars: src.chars().collect(), i: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        p.skip_ws();
        if p.i >= p.chars.len() {
            return Ok(out);
        }
        out.push(p.read()?);
    }
}

/// Parse exactly one expression.
pub fn parse_one(src: &str) -> Result<Sexp, ParseError> {
    let mut v = parse_all(src)?;
    match v.len() {
        1 => Ok(v.pop().unwrap()),
        0 => Err(ParseError::new(Pos { line: 1, col: 1 }, "empty input")),
        _ => Err(ParseError::new(v[1].pos(), "trailing input")),
    }
}

struct Reader {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Reader {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.i < self.chars.len() {
            let c = self.chars[self.i];
            if c == ';' {
                while self.i < self.chars.len() && self.chars[self.i] != '\n' {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_ws();
        let start = self.pos();
        if self.i >= self.chars.len() {
            return Err(ParseError::new(start, "unexpected end of input"));
        }
        match self.chars[self.i] {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.i >= self.chars.len() {
                        return Err(ParseError::new(start, "unclosed '('"));
                    }
                    if self.chars[self.i] == ')' {
                        self.bump();
                        return Ok(Sexp::List(items, start));
                    }
                    items.push(self.read()?);
                }
            }
            ')' => Err(ParseError::new(start, "unexpected ')'")),
            _ => {
                let mut s = String::new();
                while self.i < self.chars.len() {
                    let c = self.chars[self.i];
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(self.bump());
                }
                Ok(Sexp::Atom(s, start))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_positions() {
        let e = parse_one("(a (b c)\n  d)").unwrap();
        assert_eq!(e.to_string(), "(a (b c) d)");
        let v = e.as_list().unwrap();
        assert_eq!(v[2].pos(), Pos { line: 2, col: 3 });
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_one("(a b").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 1 });
        assert!(parse_one(")").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(parse_all("; hi\n(x) ; tail\n y").unwrap().len(), 2);
    }
}
