//! Minimal s-expression reader with source positions.
//!
//! Atoms are maximal runs of characters other than whitespace, parentheses,
//! `;` and `"`. Strings are double-quoted with `\"` and `\\` escapes.
//! `;` starts a comment running to the end of the line.

use std::fmt;

use crate::error::{Error, Result};

/// Deeper inputs are rejected so downstream recursion stays bounded.
pub const MAX_DEPTH: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SexpKind {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub line: usize,
    pub col: usize,
}

impl Sexp {
    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col, msg)
    }

    pub fn as_atom(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn expect_atom(&self, what: &str) -> Result<&str> {
        self.as_atom()
            .ok_or_else(|| self.err(format!("expected {what}, found {}", self.describe())))
    }

    pub fn expect_list(&self, what: &str) -> Result<&[Sexp]> {
        self.as_list()
            .ok_or_else(|| self.err(format!("expected {what}, found {}", self.describe())))
    }

    /// Atom or string contents.
    pub fn expect_text(&self, what: &str) -> Result<&str> {
        match &self.kind {
            SexpKind::Atom(a) | SexpKind::Str(a) => Ok(a),
            SexpKind::List(_) => Err(self.err(format!("expected {what}, found a list"))),
        }
    }

    pub fn expect_usize(&self, what: &str) -> Result<usize> {
        let a = self.expect_atom(what)?;
        a.parse()
            .map_err(|_| self.err(format!("expected {what} (a nonnegative integer), found `{a}`")))
    }

    /// The head atom of a list, if it has one.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }

    /// List whose first item is the atom `tag`; returns the remaining items.
    pub fn tagged(&self, tag: &str) -> Result<&[Sexp]> {
        let items = self.expect_list(&format!("`({tag} …)`"))?;
        match items.first().and_then(Sexp::as_atom) {
            Some(h) if h == tag => Ok(&items[1..]),
            _ => Err(self.err(format!("expected `({tag} …)`, found {}", self.describe()))),
        }
    }

    fn describe(&self) -> String {
        match &self.kind {
            SexpKind::Atom(a) => format!("atom `{a}`"),
            SexpKind::Str(s) => format!("string {s:?}"),
            SexpKind::List(items) => match items.first().and_then(Sexp::as_atom) {
                Some(h) => format!("list `({h} …)`"),
                None => "a list".to_string(),
            },
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Atom(a) => write!(f, "{a}"),
            SexpKind::Str(s) => write!(f, "{}", crate::print::quote(s)),
            SexpKind::List(items) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// True if `s` can be printed as a bare atom and read back unchanged.
pub fn is_atom_text(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | ';' | '"'))
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self, depth: usize) -> Result<Sexp> {
        if depth > MAX_DEPTH {
            return Err(Error::parse(self.line, self.col, "nesting too deep"));
        }
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let at = |kind| Sexp { kind, line, col };
        match self.chars.peek().copied() {
            None => Err(Error::parse(line, col, "unexpected end of input")),
            Some(')') => Err(Error::parse(line, col, "unbalanced `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(Error::parse(line, col, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(at(SexpKind::List(items)));
                        }
                        Some(_) => items.push(self.read(depth + 1)?),
                    }
                }
            }
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(Error::parse(line, col, "unterminated string")),
                        Some('"') => return Ok(at(SexpKind::Str(s))),
                        Some('\\') => match self.bump() {
                            Some(c @ ('"' | '\\')) => s.push(c),
                            Some('n') => s.push('\n'),
                            _ => {
                                return Err(Error::parse(self.line, self.col, "bad string escape"))
                            }
                        },
                        Some(c) => s.push(c),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"') {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(at(SexpKind::Atom(s)))
            }
        }
    }
}

/// Reads every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.chars.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read(0)?);
    }
}

/// Reads exactly one top-level expression.
pub fn parse_one(text: &str) -> Result<Sexp> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(Error::parse(1, 1, "empty input")),
        _ => Err(all[1].err("trailing input after the first expression")),
    }
}
