//! Boolean event expressions over named basic variables.
//!
//! Grammar (precedence `!` > `&` > `|`, binary operators left-associative):
//!
//! ```text
//! expr  := and (("|" | "or") and)*
//! and   := unary (("&" | "and") unary)*
//! unary := ("!" | "not") unary | atom
//! atom  := IDENT | "(" expr ")"
//! IDENT := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Two expressions are identified by [`EventExpr::canonical_key`], which is
//! built from the truth table over the variables the expression actually
//! depends on, so `p & q`, `q & p` and `p & q & (r | !r)` share a key.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of basic variables enumerated exhaustively.
pub const DEFAULT_SUPPORT_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EventExpr {
    Var(String),
    Not(Box<EventExpr>),
    And(Box<EventExpr>, Box<EventExpr>),
    Or(Box<EventExpr>, Box<EventExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
}

impl EventExpr {
    pub fn var(name: impl Into<String>) -> Self {
        EventExpr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: EventExpr) -> Self {
        EventExpr::Not(Box::new(e))
    }

    pub fn and(l: EventExpr, r: EventExpr) -> Self {
        EventExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: EventExpr, r: EventExpr) -> Self {
        EventExpr::Or(Box::new(l), Box::new(r))
    }

    /// Distinct variable names, sorted.
    pub fn support(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            EventExpr::Var(v) => {
                if !out.contains(v) {
                    out.insert(v.clone());
                }
            }
            EventExpr::Not(c) => c.collect_vars(out),
            EventExpr::And(l, r) | EventExpr::Or(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn evaluate(&self, t: &TruthAssignment) -> Result<bool> {
        Ok(match self {
            EventExpr::Var(v) => t.get(v).ok_or_else(|| Error::MissingVariable(v.clone()))?,
            EventExpr::Not(c) => !c.evaluate(t)?,
            EventExpr::And(l, r) => l.evaluate(t)? & r.evaluate(t)?,
            EventExpr::Or(l, r) => l.evaluate(t)? | r.evaluate(t)?,
        })
    }

    /// Compile against an ordered variable list for fast evaluation on bit masks.
    ///
    /// Returns `None` when a support variable is absent from `vars`.
    pub(crate) fn compile(&self, vars: &[String]) -> Option<Compiled> {
        let n = vars.len();
        Some(match self {
            EventExpr::Var(v) => {
                let k = vars.binary_search(v).ok()?;
                Compiled::Var(n - 1 - k)
            }
            EventExpr::Not(c) => Compiled::Not(Box::new(c.compile(vars)?)),
            EventExpr::And(l, r) => {
                Compiled::And(Box::new(l.compile(vars)?), Box::new(r.compile(vars)?))
            }
            EventExpr::Or(l, r) => {
                Compiled::Or(Box::new(l.compile(vars)?), Box::new(r.compile(vars)?))
            }
        })
    }

    /// Semantic identity key: essential support plus truth-table bits.
    ///
    /// Supports wider than [`DEFAULT_SUPPORT_CAP`] fall back to a syntactic key.
    pub fn canonical_key(&self) -> EventKey {
        let vars: Vec<String> = self.support().into_iter().collect();
        if vars.len() > DEFAULT_SUPPORT_CAP {
            return EventKey(format!("syntax:{self}"));
        }
        let compiled = self.compile(&vars).expect("support covers expression");
        let n = vars.len();
        let table: Vec<bool> = (0..1u64 << n).map(|m| compiled.eval(m)).collect();

        // Drop variables the truth table does not depend on.
        let essential: Vec<usize> = (0..n)
            .filter(|&k| {
                let bit = 1usize << (n - 1 - k);
                (0..table.len()).any(|m| table[m] != table[m ^ bit])
            })
            .collect();

        let mut key = String::new();
        for (i, &k) in essential.iter().enumerate() {
            if i > 0 {
                key.push(',');
            }
            key.push_str(&vars[k]);
        }
        key.push(':');
        let e = essential.len();
        for m in 0..1usize << e {
            // Lift a mask over essential variables back to the full support;
            // non-essential variables are held at false.
            let mut full = 0usize;
            for (i, &k) in essential.iter().enumerate() {
                if m >> (e - 1 - i) & 1 == 1 {
                    full |= 1 << (n - 1 - k);
                }
            }
            key.push(if table[full] { '1' } else { '0' });
        }
        EventKey(key)
    }

    /// Top-level binary connective after pushing negations inward.
    ///
    /// `!(a & b)` splits as `Or(!a, !b)`; literals return `None`.
    pub fn split_binary(&self) -> Option<(Connective, EventExpr, EventExpr)> {
        match self {
            EventExpr::Var(_) => None,
            EventExpr::And(l, r) => Some((Connective::And, (**l).clone(), (**r).clone())),
            EventExpr::Or(l, r) => Some((Connective::Or, (**l).clone(), (**r).clone())),
            EventExpr::Not(c) => match c.as_ref() {
                EventExpr::Var(_) => None,
                EventExpr::Not(inner) => inner.split_binary(),
                EventExpr::And(l, r) => Some((
                    Connective::Or,
                    EventExpr::not((**l).clone()),
                    EventExpr::not((**r).clone()),
                )),
                EventExpr::Or(l, r) => Some((
                    Connective::And,
                    EventExpr::not((**l).clone()),
                    EventExpr::not((**r).clone()),
                )),
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            EventExpr::Or(..) => 1,
            EventExpr::And(..) => 2,
            EventExpr::Not(_) => 3,
            EventExpr::Var(_) => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventExpr::Var(v) => f.write_str(v),
            EventExpr::Not(c) => {
                f.write_str("!")?;
                c.fmt_child(f, 3)
            }
            EventExpr::And(l, r) => {
                l.fmt_child(f, 2)?;
                f.write_str(" & ")?;
                r.fmt_child(f, 3)
            }
            EventExpr::Or(l, r) => {
                l.fmt_child(f, 1)?;
                f.write_str(" | ")?;
                r.fmt_child(f, 2)
            }
        }
    }
}

impl FromStr for EventExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_event(s)
    }
}

impl Serialize for EventExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EventExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_event(&s).map_err(serde::de::Error::custom)
    }
}

/// Expression with variables resolved to bit positions of an assignment mask.
#[derive(Clone, Debug)]
pub(crate) enum Compiled {
    Var(usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    #[inline]
    pub(crate) fn eval(&self, mask: u64) -> bool {
        match self {
            Compiled::Var(bit) => mask >> bit & 1 == 1,
            Compiled::Not(c) => !c.eval(mask),
            Compiled::And(l, r) => l.eval(mask) && r.eval(mask),
            Compiled::Or(l, r) => l.eval(mask) || r.eval(mask),
        }
    }
}

/// Semantic identity of an event; see [`EventExpr::canonical_key`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventKey(String);

impl EventKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruthAssignment(BTreeMap<String, bool>);

impl TruthAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<bool> {
        self.0.get(var).copied()
    }

    pub fn set(&mut self, var: impl Into<String>, value: bool) {
        self.0.insert(var.into(), value);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, bool)> for TruthAssignment {
    fn from_iter<I: IntoIterator<Item = (S, bool)>>(iter: I) -> Self {
        TruthAssignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Sorted union of the supports of `events`.
pub fn joint_support<'a>(events: impl IntoIterator<Item = &'a EventExpr>) -> Vec<String> {
    let mut vars = BTreeSet::new();
    for e in events {
        e.collect_vars(&mut vars);
    }
    vars.into_iter().collect()
}

pub(crate) fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap || size >= 64 {
        return Err(Error::SupportTooLarge { size, cap });
    }
    Ok(())
}

/// All `2^n` assignments over the joint support, in lexicographic order
/// (first variable most significant, `false` before `true`).
pub fn enumerate_support_assignments(
    events: &[EventExpr],
    cap: usize,
) -> Result<Vec<TruthAssignment>> {
    let vars = joint_support(events);
    let n = vars.len();
    check_cap(n, cap)?;
    Ok((0..1u64 << n)
        .map(|m| {
            vars.iter()
                .enumerate()
                .map(|(k, v)| (v.clone(), m >> (n - 1 - k) & 1 == 1))
                .collect()
        })
        .collect())
}

pub fn parse_event(text: &str) -> Result<EventExpr> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::EmptyExpression);
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let e = p.parse_or()?;
    if let Some(t) = p.peek() {
        return Err(Error::Syntax {
            position: t.pos,
            message: format!("unexpected {}", t.kind.describe()),
        });
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Not => "`!`".into(),
            TokenKind::And => "`&`".into(),
            TokenKind::Or => "`|`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let kind = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '!' => TokenKind::Not,
            '&' => TokenKind::And,
            '|' => TokenKind::Or,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let kind = match ident.as_str() {
                    "not" => TokenKind::Not,
                    "and" => TokenKind::And,
                    "or" => TokenKind::Or,
                    _ => TokenKind::Ident(ident),
                };
                out.push(Token { kind, pos });
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        out.push(Token { kind, pos });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_or(&mut self) -> Result<EventExpr> {
        let mut lhs = self.parse_and()?;
        while self.eat(&TokenKind::Or) {
            let rhs = self.parse_and()?;
            lhs = EventExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<EventExpr> {
        let mut lhs = self.parse_unary()?;
        while self.eat(&TokenKind::And) {
            let rhs = self.parse_unary()?;
            lhs = EventExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<EventExpr> {
        if self.eat(&TokenKind::Not) {
            return Ok(EventExpr::not(self.parse_unary()?));
        }
        self.parse_atom()
    }

    fn parse_atom(&mut self) -> Result<EventExpr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::Syntax {
                position: self.end,
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Ident(name) => Ok(EventExpr::Var(name)),
            TokenKind::LParen => {
                let inner = self.parse_or()?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(Error::Syntax {
                        position: tok.pos,
                        message: "unclosed parenthesis".into(),
                    });
                }
                Ok(inner)
            }
            other => Err(Error::Syntax {
                position: tok.pos,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}
